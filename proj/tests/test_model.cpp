#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "gemesh/checkpoint.hpp"
#include "gemesh/errors.hpp"
#include "gemesh/model.hpp"
#include "gemesh/rng.hpp"

using namespace gemesh;

namespace {

RowMat random_mat(Rng& rng, long rows, long cols, double scale = 1.0) {
  RowMat m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, scale);
  return m;
}

int code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return static_cast<int>(e.code());
  }
  return -1;
}

ModelConfig tiny_config(Flavor flavor) {
  ModelConfig c;
  c.flavor = flavor;
  c.blocks = 1;
  c.edge_layers = 1;
  c.node_layers = 1;
  c.history = 2;
  c.band_limit = 2;
  c.hidden_max_freq = 1;
  c.hidden_fields = 2;
  c.relu_samples = 5;
  return c;
}

RowMat run_model(const Model& model, const EdgePlan& plan, const RowMat& x,
                 const std::vector<RowMat>& params) {
  Tape t;
  std::vector<int> w = model.bind(t, params, false);
  return t.val(model.forward(t, plan, t.constant(x), w));
}

long total_params(const ModelConfig& c) { return Model(c).num_params(); }

}  // namespace

TEST_CASE("presets carry the frozen parameter budgets") {
  ModelConfig heat = preset("heat", Flavor::HermesBlock);
  CHECK(heat.blocks == 1);
  CHECK(heat.edge_layers == 4);
  CHECK(heat.node_layers == 3);
  CHECK(total_params(heat) == 13812);

  ModelConfig ch = preset("cahn_hilliard", Flavor::HermesBlock);
  CHECK(ch.node_layers == 1);
  CHECK(total_params(ch) == 12372);

  ModelConfig wave = preset("wave", Flavor::HermesBlock);
  CHECK(wave.blocks == 2);
  CHECK(wave.edge_layers == 2);
  CHECK(wave.node_layers == 1);

  // the conv stack lands within ten percent of the message-block budget
  ModelConfig conv = preset("cahn_hilliard", Flavor::GemConv);
  CHECK(conv.blocks == 4);
  CHECK(total_params(conv) == 13332);
  CHECK(std::abs(total_params(conv) - 12372.0) / 12372.0 < 0.10);

  CHECK(code_of([] { preset("advection", Flavor::HermesBlock); }) ==
        static_cast<int>(Err::BadConfig));
}

TEST_CASE("model construction validates its architecture") {
  CHECK(code_of([] { flavor_from_string("transformer"); }) ==
        static_cast<int>(Err::UnknownFlavor));
  CHECK(flavor_from_string(flavor_to_string(Flavor::EmanAttention)) ==
        Flavor::EmanAttention);

  ModelConfig c = tiny_config(Flavor::GemConv);
  c.blocks = 0;
  CHECK(code_of([&] { Model m(c); }) == static_cast<int>(Err::BadArchitecture));
  c = tiny_config(Flavor::HermesBlock);
  c.history = 0;
  CHECK(code_of([&] { Model m(c); }) == static_cast<int>(Err::BadArchitecture));
  c = tiny_config(Flavor::HermesBlock);
  c.edge_layers = 0;
  CHECK(code_of([&] { Model m(c); }) == static_cast<int>(Err::BadArchitecture));
}

TEST_CASE("parameter init is deterministic and fan-scaled") {
  ModelConfig c = preset("heat", Flavor::HermesBlock);
  Model model(c);
  std::vector<RowMat> a = model.init_params(42, 6.0);
  std::vector<RowMat> b = model.init_params(42, 6.0);
  REQUIRE(a.size() == model.param_names().size());
  for (size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).cwiseAbs().maxCoeff() == 0.0);

  std::vector<RowMat> other = model.init_params(43, 6.0);
  CHECK((a[0] - other[0]).cwiseAbs().maxCoeff() > 0.0);

  // a parameter's stream depends on its name, not its position: the first
  // block's weights survive growing the model
  ModelConfig deeper = c;
  deeper.blocks = 2;
  Model big(deeper);
  std::vector<RowMat> d = big.init_params(42, 6.0);
  for (size_t i = 0; i < model.param_names().size() - 1; ++i) {
    REQUIRE(big.param_names()[i] == model.param_names()[i]);
    CHECK((d[i] - a[i]).cwiseAbs().maxCoeff() == 0.0);
  }

  // empirical standard deviation tracks 1 / sqrt(fan_in)
  const long edge1 = 1;  // hidden -> hidden neighbor conv, 3600 entries
  REQUIRE(model.param_names()[edge1] == "block0.edge1");
  const double sd = std::sqrt(a[edge1].array().square().mean());
  const double want = 1.0 / std::sqrt(60.0 * 6.0);
  CHECK(std::abs(sd - want) / want < 0.1);
}

TEST_CASE("every flavor runs forward and differentiates end to end") {
  Rng rng(901);
  Mesh mesh = tetrahedron();
  TangentGeometry geom = build_geometry(mesh);
  EdgePlan plan(mesh, geom);

  for (Flavor flavor : {Flavor::GemConv, Flavor::EmanAttention, Flavor::HermesBlock}) {
    CAPTURE(flavor_to_string(flavor));
    Model model(tiny_config(flavor));
    // moderate weight scale: init-scale draws can park every sampled relu
    // input on one side of zero, flattening the function under test
    std::vector<RowMat> params;
    for (long n : model.param_sizes()) params.push_back(random_mat(rng, 1, n, 0.4));
    RowMat x = random_mat(rng, mesh.num_vertices(), 2);

    RowMat out = run_model(model, plan, x, params);
    REQUIRE(out.rows() == mesh.num_vertices());
    REQUIRE(out.cols() == 1);
    CHECK(out.allFinite());
    REQUIRE(out.norm() > 1e-8);

    RowMat pick = random_mat(rng, mesh.num_vertices(), 1);
    std::vector<RowMat> leaves = {x};
    for (const auto& p : params) leaves.push_back(p);
    auto f = [&](Tape& t, const std::vector<int>& ids) {
      std::vector<int> w(ids.begin() + 1, ids.end());
      return t.sum(t.mul(model.forward(t, plan, ids[0], w), t.constant(pick)));
    };
    CHECK(grad_check(f, leaves) < 1e-5);
  }
}

TEST_CASE("scalar predictions ignore the gauge entirely") {
  Rng rng(902);
  Mesh mesh = octahedron();
  TangentGeometry geom = build_geometry(mesh);

  for (Flavor flavor : {Flavor::GemConv, Flavor::EmanAttention, Flavor::HermesBlock}) {
    CAPTURE(flavor_to_string(flavor));
    ModelConfig c = tiny_config(flavor);
    c.identity_sigma = true;
    Model model(c);
    EdgePlan plan(mesh, geom);
    std::vector<RowMat> params = model.init_params(11, plan.mean_degree);
    RowMat x = random_mat(rng, mesh.num_vertices(), 2);
    RowMat base = run_model(model, plan, x, params);

    TangentGeometry changed = geom;
    for (int p = 0; p < mesh.num_vertices(); ++p) {
      const int slot = mesh.nbr_offsets[p] + static_cast<int>(rng.below(mesh.degree(p)));
      gauge_change(mesh, changed, p, mesh.nbrs[slot]);
    }
    EdgePlan plan2(mesh, changed);
    RowMat moved = run_model(model, plan2, x, params);
    CHECK((moved - base).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("denser nonlinearity grids shrink the equivariance defect") {
  Rng rng(903);
  Mesh mesh = octahedron();
  TangentGeometry geom = build_geometry(mesh);

  auto defect_at = [&](int samples) {
    ModelConfig c = tiny_config(Flavor::HermesBlock);
    c.relu_samples = samples;
    Model model(c);
    EdgePlan plan(mesh, geom);
    Rng wr(131);
    std::vector<RowMat> params;
    for (long n : model.param_sizes()) params.push_back(random_mat(wr, 1, n, 0.4));
    Rng local(904);
    RowMat x = random_mat(local, mesh.num_vertices(), 2);
    RowMat base = run_model(model, plan, x, params);
    REQUIRE(base.norm() > 1e-6);

    TangentGeometry changed = geom;
    Rng jitter(905);
    for (int p = 0; p < mesh.num_vertices(); ++p) {
      const int slot = mesh.nbr_offsets[p] + static_cast<int>(jitter.below(mesh.degree(p)));
      gauge_change(mesh, changed, p, mesh.nbrs[slot]);
    }
    EdgePlan plan2(mesh, changed);
    return (run_model(model, plan2, x, params) - base).cwiseAbs().maxCoeff();
  };

  const double coarse = defect_at(5);
  const double fine = defect_at(101);
  CHECK(coarse > 0.0);
  CHECK(fine < 1e-3);
  CHECK(fine < coarse);
}

TEST_CASE("delta mode adds the newest input channel") {
  Rng rng(906);
  Mesh mesh = tetrahedron();
  TangentGeometry geom = build_geometry(mesh);
  EdgePlan plan(mesh, geom);

  ModelConfig c = tiny_config(Flavor::HermesBlock);
  Model base(c);
  c.predict_delta = true;
  Model delta(c);
  std::vector<RowMat> params = base.init_params(17, plan.mean_degree);
  RowMat x = random_mat(rng, mesh.num_vertices(), 2);

  RowMat plain = run_model(base, plan, x, params);
  RowMat shifted = run_model(delta, plan, x, params);
  CHECK((shifted - (plain + x.col(1).eval())).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("relabeling vertices relabels predictions") {
  Rng rng(907);
  Mesh mesh = octahedron();
  const int v = mesh.num_vertices();
  std::vector<int> perm(v);
  for (int p = 0; p < v; ++p) perm[p] = (p + 2) % v;

  Eigen::Matrix<double, Eigen::Dynamic, 3> verts2(v, 3);
  for (int p = 0; p < v; ++p) verts2.row(perm[p]) = mesh.vertices.row(p);
  Eigen::Matrix<int, Eigen::Dynamic, 3> faces2 = mesh.faces;
  for (long f = 0; f < faces2.rows(); ++f)
    for (int k = 0; k < 3; ++k) faces2(f, k) = perm[faces2(f, k)];
  Mesh mesh2 = make_mesh(verts2, faces2);

  // identity nonlinearity: relabeling reorders neighbor sums and changes the
  // reference gauges, which the sampled relu only matches approximately
  ModelConfig c = tiny_config(Flavor::HermesBlock);
  c.identity_sigma = true;
  Model model(c);
  TangentGeometry geom = build_geometry(mesh);
  TangentGeometry geom2 = build_geometry(mesh2);
  EdgePlan plan(mesh, geom);
  EdgePlan plan2(mesh2, geom2);
  std::vector<RowMat> params = model.init_params(19, plan.mean_degree);

  RowMat x = random_mat(rng, v, 2);
  RowMat x2(v, 2);
  for (int p = 0; p < v; ++p) x2.row(perm[p]) = x.row(p);

  RowMat out = run_model(model, plan, x, params);
  RowMat out2 = run_model(model, plan2, x2, params);
  for (int p = 0; p < v; ++p)
    CHECK((out2.row(perm[p]) - out.row(p)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("checkpoints round-trip bit for bit") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path("ckpt_test");
  fs::create_directories(dir);
  const std::string path = (dir / "model.json").string();

  ModelConfig c = tiny_config(Flavor::EmanAttention);
  c.predict_delta = true;
  Model model(c);
  std::vector<RowMat> params = model.init_params(23, 3.0);
  save_checkpoint(path, model, params, 23);

  Checkpoint ck = load_checkpoint(path);
  CHECK(ck.seed == 23);
  CHECK(flavor_to_string(ck.config.flavor) == "eman_attention");
  CHECK(ck.config.predict_delta);
  CHECK(ck.config.relu_samples == c.relu_samples);
  REQUIRE(ck.params.size() == params.size());
  for (size_t i = 0; i < params.size(); ++i)
    CHECK((ck.params[i] - params[i]).cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("config serialization survives a json round trip") {
    nlohmann::json j = c;
    ModelConfig back = j.get<ModelConfig>();
    nlohmann::json j2 = back;
    CHECK(j == j2);
    ModelConfig defaults = nlohmann::json::object().get<ModelConfig>();
    CHECK(defaults.blocks == ModelConfig{}.blocks);
    CHECK(defaults.flavor == ModelConfig{}.flavor);
  }

  SUBCASE("corruption is rejected") {
    CHECK(code_of([&] { load_checkpoint((dir / "absent.json").string()); }) ==
          static_cast<int>(Err::IoError));

    const std::string bad = (dir / "bad.json").string();
    std::ofstream(bad) << "{ not json";
    CHECK(code_of([&] { load_checkpoint(bad); }) == static_cast<int>(Err::BadCheckpoint));

    nlohmann::json manifest;
    std::ifstream(path) >> manifest;
    manifest["params"][0]["name"] = "block9.mystery";
    const std::string renamed = (dir / "renamed.json").string();
    std::ofstream(renamed) << manifest.dump();
    fs::copy_file(dir / "model.bin", dir / "renamed.bin",
                  fs::copy_options::overwrite_existing);
    CHECK(code_of([&] { load_checkpoint(renamed); }) ==
          static_cast<int>(Err::BadCheckpoint));

    nlohmann::json vbump;
    std::ifstream(path) >> vbump;
    vbump["version"] = 999;
    const std::string versioned = (dir / "versioned.json").string();
    std::ofstream(versioned) << vbump.dump();
    fs::copy_file(dir / "model.bin", dir / "versioned.bin",
                  fs::copy_options::overwrite_existing);
    CHECK(code_of([&] { load_checkpoint(versioned); }) ==
          static_cast<int>(Err::BadCheckpoint));

    // blob truncated by one value
    nlohmann::json trunc;
    std::ifstream(path) >> trunc;
    trunc["blob"] = "cut.bin";
    const std::string cut = (dir / "cut.json").string();
    std::ofstream(cut) << trunc.dump();
    {
      std::ifstream src(dir / "model.bin", std::ios::binary);
      std::vector<char> bytes((std::istreambuf_iterator<char>(src)),
                              std::istreambuf_iterator<char>());
      bytes.resize(bytes.size() - sizeof(double));
      std::ofstream dst(dir / "cut.bin", std::ios::binary);
      dst.write(bytes.data(), static_cast<long>(bytes.size()));
    }
    CHECK(code_of([&] { load_checkpoint(cut); }) == static_cast<int>(Err::BadCheckpoint));
  }
}
