#include "gemesh/layers.hpp"

#include <cmath>
#include <memory>

#include "gemesh/errors.hpp"

namespace gemesh {

FeatureType edge_feature_type() { return FeatureType({0, 1}); }

namespace {

// canonical column offset of each copy of frequency n, in slot order
std::vector<long> copy_columns(const FeatureType& type, int n) {
  std::vector<long> cols;
  for (int s = 0; s < type.slots(); ++s)
    if (type.freq(s) == n) cols.push_back(type.offset(s));
  return cols;
}

}  // namespace

ConvSpec make_conv(const FeatureType& in, const FeatureType& out, KernelKind kind,
                   int band_limit) {
  ConvSpec spec;
  spec.in_type = in;
  spec.out_type = out;
  spec.kernel = block_kernel(in, out, kind, band_limit);
  long off = 0;
  for (const auto& pr : spec.kernel.pairs) {
    spec.in_cols.push_back(copy_columns(in, pr.n_in));
    spec.out_cols.push_back(copy_columns(out, pr.n_out));
    spec.w_off.push_back(off);
    off += static_cast<long>(pr.out_copies) * pr.in_copies * pr.basis->dim();
  }
  spec.num_params = off;
  return spec;
}

RowMat self_matrix(const ConvSpec& spec, const RowMat& w) {
  check(spec.kernel.kind == KernelKind::Self, Err::DimensionMismatch,
        "self_matrix needs a Self-kind conv");
  check(w.rows() == 1 && w.cols() == spec.num_params, Err::ShapeMismatch,
        "weight row does not match the conv");
  RowMat a = RowMat::Zero(spec.out_type.dim(), spec.in_type.dim());
  for (size_t pi = 0; pi < spec.kernel.pairs.size(); ++pi) {
    const auto& pr = spec.kernel.pairs[pi];
    const int kdim = pr.basis->dim();
    const long bk = static_cast<long>(pr.in_copies) * kdim;
    for (int o = 0; o < pr.out_copies; ++o)
      for (int b = 0; b < pr.in_copies; ++b)
        for (int k = 0; k < kdim; ++k)
          a.block(spec.out_cols[pi][o], spec.in_cols[pi][b], irrep_dim(pr.n_out),
                  irrep_dim(pr.n_in)) +=
              w(0, spec.w_off[pi] + o * bk + b * kdim + k) * pr.basis->elements[k][0];
  }
  return a;
}

RowMat neigh_matrix(const ConvSpec& spec, const RowMat& w, double theta) {
  check(spec.kernel.kind == KernelKind::Neigh, Err::DimensionMismatch,
        "neigh_matrix needs a Neigh-kind conv");
  check(w.rows() == 1 && w.cols() == spec.num_params, Err::ShapeMismatch,
        "weight row does not match the conv");
  RowMat a = RowMat::Zero(spec.out_type.dim(), spec.in_type.dim());
  for (size_t pi = 0; pi < spec.kernel.pairs.size(); ++pi) {
    const auto& pr = spec.kernel.pairs[pi];
    const int kdim = pr.basis->dim();
    const long bk = static_cast<long>(pr.in_copies) * kdim;
    for (int k = 0; k < kdim; ++k) {
      Eigen::MatrixXd el = pr.basis->eval(k, theta);
      for (int o = 0; o < pr.out_copies; ++o)
        for (int b = 0; b < pr.in_copies; ++b)
          a.block(spec.out_cols[pi][o], spec.in_cols[pi][b], irrep_dim(pr.n_out),
                  irrep_dim(pr.n_in)) += w(0, spec.w_off[pi] + o * bk + b * kdim + k) * el;
    }
  }
  return a;
}

int conv_self(Tape& t, const ConvSpec& spec, int x, int w) {
  check(spec.kernel.kind == KernelKind::Self, Err::DimensionMismatch,
        "conv_self needs a Self-kind conv");
  check(t.cols(x) == spec.in_type.dim(), Err::DimensionMismatch,
        "conv_self input width does not match the conv");
  RowMat a = self_matrix(spec, t.val(w));
  RowMat out = t.val(x) * a.transpose();
  return t.custom({x, w}, std::move(out), [&spec, x, w, a = std::move(a)](Tape& tt, int id) {
    const RowMat& g = tt.grad(id);
    if (tt.needs_grad(x)) tt.grad_ref(x).noalias() += g * a;
    if (!tt.needs_grad(w)) return;
    RowMat da = g.transpose() * tt.val(x);
    RowMat& gw = tt.grad_ref(w);
    for (size_t pi = 0; pi < spec.kernel.pairs.size(); ++pi) {
      const auto& pr = spec.kernel.pairs[pi];
      const int kdim = pr.basis->dim();
      const long bk = static_cast<long>(pr.in_copies) * kdim;
      const int dout = irrep_dim(pr.n_out), din = irrep_dim(pr.n_in);
      for (int o = 0; o < pr.out_copies; ++o)
        for (int b = 0; b < pr.in_copies; ++b)
          for (int k = 0; k < kdim; ++k) {
            const Eigen::MatrixXd& el = pr.basis->elements[k][0];
            double acc = 0.0;
            for (int r = 0; r < dout; ++r)
              for (int c = 0; c < din; ++c)
                acc += da(spec.out_cols[pi][o] + r, spec.in_cols[pi][b] + c) * el(r, c);
            gw(0, spec.w_off[pi] + o * bk + b * kdim + k) += acc;
          }
    }
  });
}

int conv_neigh(Tape& t, const EdgePlan& plan, const ConvSpec& spec, int x, int w) {
  check(spec.kernel.kind == KernelKind::Neigh, Err::DimensionMismatch,
        "conv_neigh needs a Neigh-kind conv");
  check(t.cols(x) == spec.in_type.dim(), Err::DimensionMismatch,
        "conv_neigh input width does not match the conv");
  check(t.rows(x) == plan.num_edges, Err::DimensionMismatch,
        "conv_neigh expects one row per directed edge");
  check(t.rows(w) == 1 && t.cols(w) == spec.num_params, Err::ShapeMismatch,
        "weight row does not match the conv");
  const long E = plan.num_edges;
  const RowMat& xv = t.val(x);
  const RowMat& wv = t.val(w);
  // per-(pair, out-component) contraction of the input against the evaluated
  // basis, kept for the backward pass
  auto z_store = std::make_shared<std::vector<RowMat>>();
  RowMat out = RowMat::Zero(E, spec.out_type.dim());
  for (size_t pi = 0; pi < spec.kernel.pairs.size(); ++pi) {
    const auto& pr = spec.kernel.pairs[pi];
    const RowMat& table = plan.basis_table(*pr.basis);
    const int kdim = pr.basis->dim();
    const int din = irrep_dim(pr.n_in), dout = irrep_dim(pr.n_out);
    const long bk = static_cast<long>(pr.in_copies) * kdim;
    Eigen::Map<const RowMat> wp(wv.data() + spec.w_off[pi], pr.out_copies, bk);
    for (int r = 0; r < dout; ++r) {
      RowMat z(E, bk);
      for (long e = 0; e < E; ++e) {
        const double* te = table.data() + e * table.cols();
        const double* xe = xv.data() + e * xv.cols();
        double* ze = z.data() + e * bk;
        for (int b = 0; b < pr.in_copies; ++b) {
          const double* xb = xe + spec.in_cols[pi][b];
          for (int k = 0; k < kdim; ++k) {
            const double* tk = te + (k * dout + r) * din;
            double acc = 0.0;
            for (int c = 0; c < din; ++c) acc += tk[c] * xb[c];
            ze[b * kdim + k] = acc;
          }
        }
      }
      RowMat outr = z * wp.transpose();
      for (int o = 0; o < pr.out_copies; ++o) out.col(spec.out_cols[pi][o] + r) += outr.col(o);
      z_store->push_back(std::move(z));
    }
  }
  return t.custom({x, w}, std::move(out), [&plan, &spec, x, w, z_store](Tape& tt, int id) {
    const bool want_x = tt.needs_grad(x), want_w = tt.needs_grad(w);
    if (!want_x && !want_w) return;
    const RowMat& g = tt.grad(id);
    const RowMat& wv = tt.val(w);
    const long E = g.rows();
    size_t zi = 0;
    for (size_t pi = 0; pi < spec.kernel.pairs.size(); ++pi) {
      const auto& pr = spec.kernel.pairs[pi];
      const RowMat& table = plan.basis_table(*pr.basis);
      const int kdim = pr.basis->dim();
      const int din = irrep_dim(pr.n_in), dout = irrep_dim(pr.n_out);
      const long bk = static_cast<long>(pr.in_copies) * kdim;
      Eigen::Map<const RowMat> wp(wv.data() + spec.w_off[pi], pr.out_copies, bk);
      for (int r = 0; r < dout; ++r) {
        const RowMat& z = (*z_store)[zi++];
        RowMat gr(E, pr.out_copies);
        for (int o = 0; o < pr.out_copies; ++o) gr.col(o) = g.col(spec.out_cols[pi][o] + r);
        if (want_w) {
          Eigen::Map<RowMat> dwp(tt.grad_ref(w).data() + spec.w_off[pi], pr.out_copies, bk);
          dwp.noalias() += gr.transpose() * z;
        }
        if (want_x) {
          RowMat dz = gr * wp;
          RowMat& gx = tt.grad_ref(x);
          for (long e = 0; e < E; ++e) {
            const double* te = table.data() + e * table.cols();
            const double* dze = dz.data() + e * bk;
            double* gxe = gx.data() + e * gx.cols();
            for (int b = 0; b < pr.in_copies; ++b) {
              double* gxb = gxe + spec.in_cols[pi][b];
              for (int k = 0; k < kdim; ++k) {
                const double* tk = te + (k * dout + r) * din;
                const double dzv = dze[b * kdim + k];
                for (int c = 0; c < din; ++c) gxb[c] += tk[c] * dzv;
              }
            }
          }
        }
      }
    }
  });
}

int transport_to_dst(Tape& t, const EdgePlan& plan, const FeatureType& type, int x) {
  check(t.cols(x) == type.dim(), Err::DimensionMismatch,
        "transport input width does not match the type");
  check(t.rows(x) == plan.num_edges, Err::DimensionMismatch,
        "transport expects one row per directed edge");
  const RowMat& xv = t.val(x);
  RowMat out = xv;
  for (int s = 0; s < type.slots(); ++s) {
    const int n = type.freq(s);
    if (n == 0) continue;
    const auto& rot = plan.rotation(n);
    const long c0 = type.offset(s);
    out.col(c0) = rot.c.cwiseProduct(xv.col(c0)) - rot.s.cwiseProduct(xv.col(c0 + 1));
    out.col(c0 + 1) = rot.s.cwiseProduct(xv.col(c0)) + rot.c.cwiseProduct(xv.col(c0 + 1));
  }
  return t.custom({x}, std::move(out), [&plan, type, x](Tape& tt, int id) {
    if (!tt.needs_grad(x)) return;
    const RowMat& g = tt.grad(id);
    RowMat& gx = tt.grad_ref(x);
    for (int s = 0; s < type.slots(); ++s) {
      const int n = type.freq(s);
      const long c0 = type.offset(s);
      if (n == 0) {
        gx.col(c0) += g.col(c0);
        continue;
      }
      const auto& rot = plan.rotation(n);
      gx.col(c0) += rot.c.cwiseProduct(g.col(c0)) + rot.s.cwiseProduct(g.col(c0 + 1));
      gx.col(c0 + 1) += rot.c.cwiseProduct(g.col(c0 + 1)) - rot.s.cwiseProduct(g.col(c0));
    }
  });
}

int regular_relu(Tape& t, const RegularSampler& sampler, int x) {
  check(t.cols(x) == sampler.type.dim(), Err::DimensionMismatch,
        "nonlinearity input width does not match the sampler");
  const long rows = t.rows(x);
  const long f2 = 2L * sampler.max_freq + 1;
  const long frows = rows * sampler.fields;
  const long n = sampler.samples;
  const RowMat& xv = t.val(x);
  Eigen::Map<const RowMat> xf(xv.data(), frows, f2);
  RowMat u = xf * sampler.synthesis.transpose();
  auto mask = std::make_shared<std::vector<char>>(static_cast<size_t>(frows) * n);
  {
    double* ud = u.data();
    char* md = mask->data();
    const long total = frows * n;
    for (long i = 0; i < total; ++i) {
      const bool pos = ud[i] > 0.0;
      md[i] = pos;
      if (!pos) ud[i] = 0.0;
    }
  }
  RowMat yf = u * sampler.analysis.transpose();
  RowMat out = Eigen::Map<const RowMat>(yf.data(), rows, t.cols(x));
  return t.custom({x}, std::move(out), [&sampler, x, mask, frows, f2, n](Tape& tt, int id) {
    if (!tt.needs_grad(x)) return;
    const RowMat& g = tt.grad(id);
    Eigen::Map<const RowMat> gf(g.data(), frows, f2);
    RowMat du = gf * sampler.analysis;
    {
      double* dd = du.data();
      const char* md = mask->data();
      const long total = frows * n;
      for (long i = 0; i < total; ++i)
        if (!md[i]) dd[i] = 0.0;
    }
    RowMat dxf = du * sampler.synthesis;
    RowMat& gx = tt.grad_ref(x);
    gx += Eigen::Map<const RowMat>(dxf.data(), gx.rows(), gx.cols());
  });
}

GemConvLayer::GemConvLayer(const FeatureType& in, const FeatureType& out, int band_limit,
                           bool with_self)
    : neigh(make_conv(in, out, KernelKind::Neigh, band_limit)),
      self(make_conv(in, out, KernelKind::Self, band_limit)),
      use_self(with_self) {}

std::vector<long> GemConvLayer::param_sizes() const {
  std::vector<long> sizes = {neigh.num_params};
  if (use_self) sizes.push_back(self.num_params);
  return sizes;
}

std::vector<double> GemConvLayer::param_fans(double mean_degree) const {
  std::vector<double> fans = {neigh.in_type.dim() * mean_degree};
  if (use_self) fans.push_back(static_cast<double>(self.in_type.dim()));
  return fans;
}

std::vector<std::string> GemConvLayer::param_names() const {
  std::vector<std::string> names = {"neigh"};
  if (use_self) names.push_back("self");
  return names;
}

int GemConvLayer::forward(Tape& t, const EdgePlan& plan, int x, const std::vector<int>& w) const {
  int edge_x = t.gather_rows(x, plan.src);
  edge_x = transport_to_dst(t, plan, neigh.in_type, edge_x);
  int msg = conv_neigh(t, plan, neigh, edge_x, w[0]);
  int agg = t.scatter_sum(msg, plan.by_dst);
  if (!use_self) return agg;
  return t.add(agg, conv_self(t, self, x, w[1]));
}

EmanLayer::EmanLayer(const FeatureType& in, const FeatureType& out, const FeatureType& key,
                     int band_limit, bool with_self)
    : query(make_conv(in, key, KernelKind::Self, band_limit)),
      key_self(make_conv(in, key, KernelKind::Self, band_limit)),
      key_neigh(make_conv(in, key, KernelKind::Neigh, band_limit)),
      value_self(make_conv(in, out, KernelKind::Self, band_limit)),
      value_neigh(make_conv(in, out, KernelKind::Neigh, band_limit)),
      use_self(with_self),
      scale(1.0 / std::sqrt(static_cast<double>(key.dim()))) {}

std::vector<long> EmanLayer::param_sizes() const {
  if (use_self)
    return {query.num_params, key_self.num_params, key_neigh.num_params, value_self.num_params,
            value_neigh.num_params};
  return {query.num_params, key_neigh.num_params, value_neigh.num_params};
}

std::vector<double> EmanLayer::param_fans(double mean_degree) const {
  const double din = static_cast<double>(query.in_type.dim());
  if (use_self) return {din, din, din * mean_degree, din, din * mean_degree};
  return {din, din * mean_degree, din * mean_degree};
}

std::vector<std::string> EmanLayer::param_names() const {
  if (use_self) return {"query", "key_self", "key_neigh", "value_self", "value_neigh"};
  return {"query", "key_neigh", "value_neigh"};
}

int EmanLayer::attention(Tape& t, const EdgePlan& plan, int x, const std::vector<int>& w) const {
  const int wq = w[0];
  const int wkn = use_self ? w[2] : w[1];
  int q = conv_self(t, query, x, wq);
  int gathered = t.gather_rows(x, plan.src);
  gathered = transport_to_dst(t, plan, key_neigh.in_type, gathered);
  int kn = conv_neigh(t, plan, key_neigh, gathered, wkn);
  int q_at_dst = t.gather_rows(q, plan.dst);
  int logit_n = t.scalar_mul(t.row_sum(t.mul(q_at_dst, kn)), scale);
  if (!use_self) return t.segment_softmax(logit_n, plan.by_dst);
  int ks = conv_self(t, key_self, x, w[1]);
  int logit_s = t.scalar_mul(t.row_sum(t.mul(q, ks)), scale);
  return t.segment_softmax(t.concat_rows({logit_s, logit_n}), plan.attn_groups);
}

int EmanLayer::forward(Tape& t, const EdgePlan& plan, int x, const std::vector<int>& w) const {
  const long v = plan.num_vertices, e = plan.num_edges;
  int alpha = attention(t, plan, x, w);
  int gathered = t.gather_rows(x, plan.src);
  gathered = transport_to_dst(t, plan, value_neigh.in_type, gathered);
  if (!use_self) {
    int vn = conv_neigh(t, plan, value_neigh, gathered, w[2]);
    return t.scatter_sum(t.row_scale(vn, alpha), plan.by_dst);
  }
  int vn = conv_neigh(t, plan, value_neigh, gathered, w[4]);
  int vs = conv_self(t, value_self, x, w[3]);
  int alpha_s = t.slice_rows(alpha, 0, v);
  int alpha_n = t.slice_rows(alpha, v, e);
  int neigh_part = t.scatter_sum(t.row_scale(vn, alpha_n), plan.by_dst);
  return t.add(neigh_part, t.row_scale(vs, alpha_s));
}

HermesBlockLayer::HermesBlockLayer(const FeatureType& in, const FeatureType& hidden, int n_edge,
                                   int n_node, int band_limit, bool edge_feats,
                                   bool with_residual, const RegularSampler* sigma)
    : in_type(in), out_type(hidden), with_edge_feats(edge_feats), residual(with_residual),
      sampler(sigma) {
  check(n_edge >= 1 && n_node >= 1, Err::BadArchitecture,
        "a message block needs at least one edge conv and one node conv");
  if (with_residual)
    check(in == hidden, Err::ResidualTypeMismatch,
          "residual connection requires equal block input and output types");
  if (sigma != nullptr)
    check(sigma->type == hidden, Err::DimensionMismatch,
          "nonlinearity sampler type must match the block's hidden type");
  FeatureType e_in = in.concat(in);
  if (edge_feats) e_in = e_in.concat(edge_feature_type());
  edge_convs.push_back(make_conv(e_in, hidden, KernelKind::Neigh, band_limit));
  for (int i = 1; i < n_edge; ++i)
    edge_convs.push_back(make_conv(hidden, hidden, KernelKind::Neigh, band_limit));
  node_convs.push_back(make_conv(hidden.concat(in), hidden, KernelKind::Self, band_limit));
  for (int i = 1; i < n_node; ++i)
    node_convs.push_back(make_conv(hidden, hidden, KernelKind::Self, band_limit));
}

std::vector<long> HermesBlockLayer::param_sizes() const {
  std::vector<long> sizes;
  for (const auto& c : edge_convs) sizes.push_back(c.num_params);
  for (const auto& c : node_convs) sizes.push_back(c.num_params);
  return sizes;
}

std::vector<double> HermesBlockLayer::param_fans(double mean_degree) const {
  std::vector<double> fans;
  for (const auto& c : edge_convs) fans.push_back(c.in_type.dim() * mean_degree);
  for (const auto& c : node_convs) fans.push_back(static_cast<double>(c.in_type.dim()));
  return fans;
}

std::vector<std::string> HermesBlockLayer::param_names() const {
  std::vector<std::string> names;
  for (size_t i = 0; i < edge_convs.size(); ++i) names.push_back("edge" + std::to_string(i));
  for (size_t i = 0; i < node_convs.size(); ++i) names.push_back("node" + std::to_string(i));
  return names;
}

int HermesBlockLayer::forward(Tape& t, const EdgePlan& plan, int x,
                              const std::vector<int>& w) const {
  std::vector<int> parts = {t.gather_rows(x, plan.dst),
                            transport_to_dst(t, plan, in_type, t.gather_rows(x, plan.src))};
  if (with_edge_feats) parts.push_back(t.constant(plan.edge_feats));
  int h = t.concat_cols(parts);
  for (size_t i = 0; i < edge_convs.size(); ++i) {
    h = conv_neigh(t, plan, edge_convs[i], h, w[i]);
    if (sampler != nullptr) h = regular_relu(t, *sampler, h);
  }
  int m = t.scatter_sum(h, plan.by_dst);
  int g = t.concat_cols({m, x});
  for (size_t j = 0; j < node_convs.size(); ++j) {
    g = conv_self(t, node_convs[j], g, w[edge_convs.size() + j]);
    if (sampler != nullptr) g = regular_relu(t, *sampler, g);
  }
  if (residual) g = t.add(g, x);
  return g;
}

}  // namespace gemesh
