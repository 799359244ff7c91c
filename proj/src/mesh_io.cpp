#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gemesh/errors.hpp"
#include "gemesh/mesh.hpp"

namespace gemesh {

namespace {

// whitespace tokens with '#'-to-end-of-line comments stripped
std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  bool in_comment = false;
  for (char c : text) {
    if (c == '\n') in_comment = false;
    if (in_comment) continue;
    if (c == '#') {
      in_comment = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

double parse_double(const std::string& tok, const char* what) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    fail(Err::ParseError, std::string("expected number for ") + what + ", got '" + tok + "'");
  }
  check(pos == tok.size(), Err::ParseError,
        std::string("trailing characters in number '") + tok + "'");
  return v;
}

long parse_long(const std::string& tok, const char* what) {
  size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    fail(Err::ParseError, std::string("expected integer for ") + what + ", got '" + tok + "'");
  }
  check(pos == tok.size(), Err::ParseError,
        std::string("trailing characters in integer '") + tok + "'");
  return v;
}

}  // namespace

Mesh parse_off(const std::string& text) {
  std::vector<std::string> toks = tokenize(text);
  size_t i = 0;
  auto next = [&](const char* what) -> const std::string& {
    check(i < toks.size(), Err::ParseError, std::string("unexpected end of OFF data, wanted ") + what);
    return toks[i++];
  };
  check(!toks.empty() && toks[0] == "OFF", Err::ParseError, "missing OFF header");
  ++i;
  long nv = parse_long(next("vertex count"), "vertex count");
  long nf = parse_long(next("face count"), "face count");
  parse_long(next("edge count"), "edge count");  // ignored per convention
  check(nv >= 0 && nf >= 0, Err::ParseError, "negative counts in OFF header");

  Eigen::Matrix<double, Eigen::Dynamic, 3> v(nv, 3);
  for (long k = 0; k < nv; ++k) {
    for (int c = 0; c < 3; ++c) v(k, c) = parse_double(next("vertex coordinate"), "vertex coordinate");
  }
  Eigen::Matrix<int, Eigen::Dynamic, 3> f(nf, 3);
  for (long k = 0; k < nf; ++k) {
    long sides = parse_long(next("face size"), "face size");
    check(sides == 3, Err::NonTriangular,
          "face " + std::to_string(k) + " has " + std::to_string(sides) + " sides");
    for (int c = 0; c < 3; ++c) {
      f(k, c) = static_cast<int>(parse_long(next("face index"), "face index"));
    }
  }
  return make_mesh(std::move(v), std::move(f));
}

Mesh parse_obj(const std::string& text) {
  std::vector<Eigen::RowVector3d> verts;
  std::vector<Eigen::RowVector3i> faces;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      std::string xs, ys, zs;
      check(static_cast<bool>(ls >> xs >> ys >> zs), Err::ParseError,
            "line " + std::to_string(lineno) + ": vertex needs 3 coordinates");
      verts.push_back({parse_double(xs, "x"), parse_double(ys, "y"), parse_double(zs, "z")});
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string ref;
      while (ls >> ref) {
        // accept v, v/t, v//n, v/t/n; only the vertex index matters
        std::string head = ref.substr(0, ref.find('/'));
        long raw = parse_long(head, "face vertex index");
        long resolved = raw > 0 ? raw - 1 : static_cast<long>(verts.size()) + raw;
        check(resolved >= 0 && resolved < static_cast<long>(verts.size()), Err::ParseError,
              "line " + std::to_string(lineno) + ": face index " + std::to_string(raw) +
                  " out of range");
        idx.push_back(static_cast<int>(resolved));
      }
      check(idx.size() == 3, Err::NonTriangular,
            "line " + std::to_string(lineno) + ": face has " + std::to_string(idx.size()) +
                " vertices");
      faces.push_back({idx[0], idx[1], idx[2]});
    }
    // vn/vt/o/g/s/usemtl/mtllib and friends carry no geometry we need
  }
  Eigen::Matrix<double, Eigen::Dynamic, 3> v(verts.size(), 3);
  for (size_t k = 0; k < verts.size(); ++k) v.row(k) = verts[k];
  Eigen::Matrix<int, Eigen::Dynamic, 3> f(faces.size(), 3);
  for (size_t k = 0; k < faces.size(); ++k) f.row(k) = faces[k];
  return make_mesh(std::move(v), std::move(f));
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(static_cast<bool>(in), Err::IoError, "cannot open mesh file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == "off") return parse_off(text);
  if (ext == "obj") return parse_obj(text);
  fail(Err::ParseError, "unsupported mesh format '" + ext + "' for " + path);
}

void save_off(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  check(static_cast<bool>(out), Err::IoError, "cannot write mesh file " + path);
  out.precision(17);
  out << "OFF\n" << mesh.num_vertices() << " " << mesh.num_faces() << " 0\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    out << mesh.vertices(v, 0) << " " << mesh.vertices(v, 1) << " " << mesh.vertices(v, 2) << "\n";
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    out << "3 " << mesh.faces(f, 0) << " " << mesh.faces(f, 1) << " " << mesh.faces(f, 2) << "\n";
  }
  check(static_cast<bool>(out), Err::IoError, "write failed for " + path);
}

}  // namespace gemesh
