#include "tripent/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace tripent {

Mat dipole_operator() {
  Mat d = Mat::Zero(kDim, kDim);
  for (Sublevel j : kSublevels)
    for (int nuc = 0; nuc < 4; ++nuc) {
      d(ground_index(nuc), excited_index(j, nuc)) = 1;
      d(excited_index(j, nuc), ground_index(nuc)) = 1;
    }
  return d;
}

Mat effective_hamiltonian(const SystemParams& p) {
  Mat h = Mat::Zero(kDim, kDim);
  h.topLeftCorner(4, 4) = ground_block(p);
  h.bottomRightCorner(kExcitedDim, kExcitedDim) = effective_excited_block(p);
  return h;
}

Mat exact_hamiltonian(const SystemParams& p) {
  Mat h = Mat::Zero(kDim, kDim);
  h.topLeftCorner(4, 4) = ground_block(p);
  h.bottomRightCorner(kExcitedDim, kExcitedDim) = excited_block(p);
  return h;
}

namespace {

struct Eigenspace {
  double energy;
  Mat projector;  // 16×16
};

// Eigenspaces of one diagonal block, embedded into the 16-dim space.
std::vector<Eigenspace> block_eigenspaces(const Mat& h, int offset, int dim, double tol) {
  const Eigh e = eigh(h.block(offset, offset, dim, dim));
  std::vector<Eigenspace> out;
  int start = 0;
  for (int k = 1; k <= dim; ++k) {
    if (k < dim && e.values(k) - e.values(k - 1) <= tol) continue;
    Mat v = Mat::Zero(kDim, k - start);
    v.middleRows(offset, dim) = e.vectors.middleCols(start, k - start);
    out.push_back({e.values.segment(start, k - start).mean(), v * v.adjoint()});
    start = k;
  }
  return out;
}

double spectral_radius(const Mat& h) {
  const RVec ev = eigh(h).values;
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

std::vector<DecayChannel> build_channels(const Mat& h, const std::array<double, 3>& taus, double cluster_tol) {
  if (h.rows() != kDim || h.cols() != kDim) throw DimensionMismatch("decay_channels expects a 16x16 Hamiltonian");
  if (!is_hermitian(h)) throw NotHermitian("decay_channels: Hamiltonian is not Hermitian");
  if (h.topRightCorner(4, kExcitedDim).cwiseAbs().maxCoeff() > 0)
    throw InvalidState("decay_channels: Hamiltonian couples ground and excited blocks");
  const double tol = cluster_tol * std::max(1.0, spectral_radius(h));
  const auto ground = block_eigenspaces(h, 0, 4, tol);
  const auto excited = block_eigenspaces(h, 4, kExcitedDim, tol);

  // Each sublevel radiates into its own bath: D_j = Σ_nuc |0 nuc⟩⟨e T_j nuc|.
  std::vector<DecayChannel> out;
  for (Sublevel j : kSublevels) {
    Mat lower = Mat::Zero(kDim, kDim);
    for (int nuc = 0; nuc < 4; ++nuc) lower(ground_index(nuc), excited_index(j, nuc)) = 1;
    const double rate = 1.0 / (2 * taus[index(j)]);
    for (const Eigenspace& ex : excited) {
      for (const Eigenspace& gr : ground) {
        Mat a = gr.projector * lower * ex.projector;
        if (a.cwiseAbs().maxCoeff() < 1e-12) continue;
        const double freq = ex.energy - gr.energy;
        auto same = std::find_if(out.begin(), out.end(), [&](const DecayChannel& c) {
          return c.source == index(j) && std::abs(c.frequency - freq) <= tol;
        });
        if (same != out.end())
          same->op += a;
        else
          out.push_back({freq, a, rate, index(j)});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const DecayChannel& x, const DecayChannel& y) { return x.frequency < y.frequency; });
  return out;
}

}  // namespace

std::vector<DecayChannel> decay_channels(const Mat& h, double tau, double cluster_tol) {
  return build_channels(h, {tau, tau, tau}, cluster_tol);
}

std::vector<DecayChannel> decay_channels(const Mat& h, const std::array<double, 3>& taus, double cluster_tol) {
  return build_channels(h, taus, cluster_tol);
}

std::vector<std::pair<int, int>> close_exempt_pairs(int n, const std::vector<std::pair<int, int>>& pairs) {
  std::vector<int> root(n);
  for (int i = 0; i < n; ++i) root[i] = i;
  std::function<int(int)> find = [&](int i) { return root[i] == i ? i : root[i] = find(root[i]); };
  for (auto [i, k] : pairs) {
    if (i < 0 || k < 0 || i >= n || k >= n) throw DimensionMismatch("exempt pair index out of range");
    root[find(i)] = find(k);
  }
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      if (find(i) == find(k)) out.emplace_back(i, k);
  return out;
}

std::vector<std::pair<int, int>> rwa_exempt_pairs(const std::vector<DecayChannel>& ch, int source, double factor) {
  std::vector<std::pair<int, int>> near;
  for (int i = 0; i < static_cast<int>(ch.size()); ++i)
    for (int k = i + 1; k < static_cast<int>(ch.size()); ++k) {
      if (ch[i].source != ch[k].source) continue;  // distinct baths never interfere
      if (source >= 0 && ch[i].source != source) continue;
      const double inv_tau = 2 * std::max(ch[i].rate, ch[k].rate);
      if (std::abs(ch[i].frequency - ch[k].frequency) < factor * inv_tau) near.emplace_back(i, k);
    }
  return close_exempt_pairs(static_cast<int>(ch.size()), near);
}

std::vector<std::pair<int, int>> rwa_exempt_pairs(const std::vector<DecayChannel>& ch, double factor) {
  return rwa_exempt_pairs(ch, -1, factor);
}

std::vector<std::pair<int, int>> t0_coherent_pairs(const std::vector<DecayChannel>& ch) {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(ch.size()); ++i) {
    if (ch[i].source != index(Sublevel::Zero)) continue;
    const Mat& a = ch[i].op;
    const double middle = a.row(ground_index(DU)).norm() + a.row(ground_index(UD)).norm();
    const double outer = a.row(ground_index(DD)).norm() + a.row(ground_index(UU)).norm();
    if (middle > 0 && outer == 0) idx.push_back(i);
  }
  std::vector<std::pair<int, int>> out;
  for (size_t x = 0; x < idx.size(); ++x)
    for (size_t y = x + 1; y < idx.size(); ++y) out.emplace_back(idx[x], idx[y]);
  return out;
}

void prepare(MasterEqSpec& spec) {
  const int n = static_cast<int>(spec.channels.size());
  spec.jumps.clear();
  spec.cross.clear();
  const Eigen::Index dim = spec.hamiltonian.rows() ? spec.hamiltonian.rows() : kDim;
  spec.jump_norm = Mat::Zero(dim, dim);
  for (const DecayChannel& c : spec.channels) {
    spec.jumps.push_back(std::sqrt(2 * c.rate) * c.op);
    spec.jump_norm += c.rate * c.op.adjoint() * c.op;
  }
  for (auto [i, k] : spec.exempt_pairs) {
    if (i < 0 || k < 0 || i >= n || k >= n || i == k) throw DimensionMismatch("exempt pair index out of range");
    for (auto [x, y] : {std::pair{i, k}, std::pair{k, i}}) {
      const DecayChannel &cx = spec.channels[x], &cy = spec.channels[y];
      spec.cross.push_back({cx.op, cy.op.adjoint(), cy.op.adjoint() * cx.op, cx.rate, cy.frequency - cx.frequency, x});
    }
  }
  spec.cross_of.assign(n, {});
  for (size_t t = 0; t < spec.cross.size(); ++t) spec.cross_of[spec.cross[t].source].push_back(static_cast<int>(t));
  spec.block_form = dim == kDim;
  for (const DecayChannel& c : spec.channels) {
    if (!spec.block_form) break;
    Mat rest = c.op;
    rest.block(0, 4, 4, kExcitedDim).setZero();
    spec.block_form = rest.cwiseAbs().maxCoeff() == 0.0;
  }
  spec.low.clear();
  spec.cross_low.clear();
  spec.cross_ee.clear();
  if (spec.block_form) {
    for (const DecayChannel& c : spec.channels) spec.low.push_back(c.op.block(0, 4, 4, kExcitedDim));
    for (const DissipatorTerm& t : spec.cross) {
      spec.cross_low.push_back(t.b_dag.block(4, 0, kExcitedDim, 4));
      spec.cross_ee.push_back(t.b_dag_a.block(4, 4, kExcitedDim, kExcitedDim));
    }
    spec.jump_norm_ee = spec.jump_norm.block(4, 4, kExcitedDim, kExcitedDim);
  }
  spec.prepared = true;
}

MasterEqSpec make_master_spec(const Mat& h, std::vector<DecayChannel> channels, Picture picture,
                              std::optional<std::vector<std::pair<int, int>>> exempt) {
  MasterEqSpec spec;
  spec.hamiltonian = h;
  spec.exempt_pairs = exempt ? *exempt : rwa_exempt_pairs(channels);
  spec.channels = std::move(channels);
  spec.picture = picture;
  prepare(spec);
  return spec;
}

namespace {

const MasterEqSpec& prepared(const MasterEqSpec& spec, MasterEqSpec& scratch) {
  if (spec.prepared) return spec;
  scratch = spec;
  prepare(scratch);
  return scratch;
}

Mat secular_part(const Mat& rho, const MasterEqSpec& s, double t) {
  Mat out = -(s.jump_norm * rho + rho * s.jump_norm);
  for (const Mat& l : s.jumps) out.noalias() += l * rho * l.adjoint();
  if (s.picture == Picture::Schroedinger) {
    const Mat& h = s.hamiltonian_at ? s.hamiltonian_at(t) : s.hamiltonian;
    out.noalias() += -I * (h * rho - rho * h);
  }
  return out;
}

}  // namespace

Mat secular_rhs(const Mat& rho, const MasterEqSpec& spec, double t) {
  MasterEqSpec scratch;
  return secular_part(rho, prepared(spec, scratch), t);
}

namespace {

cplx cross_weight(const MasterEqSpec& s, const DissipatorTerm& term, double t) {
  return (s.picture == Picture::Interaction ? std::exp(I * term.dw * t) : cplx(1.0)) * term.rate;
}

void add_coherent(Mat& out, const Mat& rho, const MasterEqSpec& s, double t) {
  if (s.picture != Picture::Schroedinger) return;
  const Mat& h = s.hamiltonian_at ? s.hamiltonian_at(t) : s.hamiltonian;
  out.noalias() += -I * (h * rho - rho * h);
}

// Block-form RHS: every channel is [0 a; 0 0] with a 4×12.
Mat block_rhs(double t, const Mat& rho, const MasterEqSpec& s) {
  const Mat rho_ee = rho.block(4, 4, kExcitedDim, kExcitedDim);
  Mat x = Mat::Zero(kDim, kDim);
  Mat norm_op = s.jump_norm_ee;
  Mat m(kExcitedDim, 4);
  for (size_t c = 0; c < s.channels.size(); ++c) {
    m = s.channels[c].rate * s.low[c].adjoint();
    for (int idx : s.cross_of[c]) {
      const cplx w = cross_weight(s, s.cross[idx], t);
      m += w * s.cross_low[idx];
      norm_op += w * s.cross_ee[idx];
    }
    x.topLeftCorner(4, 4).noalias() += (s.low[c] * rho_ee) * m;
  }
  x.bottomRows(kExcitedDim).noalias() -= norm_op * rho.bottomRows(kExcitedDim);
  Mat out = x + x.adjoint();
  add_coherent(out, rho, s, t);
  return out;
}

}  // namespace

Mat partial_rwa_rhs(double t, const Mat& rho, const MasterEqSpec& spec) {
  MasterEqSpec scratch;
  const MasterEqSpec& s = prepared(spec, scratch);
  if (s.block_form) return block_rhs(t, rho, s);
  if (s.cross.empty()) return secular_part(rho, s, t);
  // X = Σ_x A_x ρ (Γ_x A_x† + Σ_y e^{iΔt}Γ_x A_y†) − (J + Σ e^{iΔt}Γ_x A_y†A_x) ρ, result X + X†.
  const Eigen::Index d = rho.rows();
  Mat x = Mat::Zero(d, d);
  Mat norm_op = s.jump_norm;
  Mat m(d, d);
  for (size_t c = 0; c < s.channels.size(); ++c) {
    const DecayChannel& ch = s.channels[c];
    m = ch.rate * ch.op.adjoint();
    for (int idx : s.cross_of[c]) {
      const cplx w = cross_weight(s, s.cross[idx], t);
      m += w * s.cross[idx].b_dag;
      norm_op += w * s.cross[idx].b_dag_a;
    }
    x.noalias() += (ch.op * rho) * m;
  }
  x.noalias() -= norm_op * rho;
  Mat out = x + x.adjoint();
  add_coherent(out, rho, s, t);
  return out;
}

IntegrateResult integrate_master(const Mat& rho0, const MasterEqSpec& spec_in, double t_end,
                                 const IntegrateOptions& opt) {
  MasterEqSpec scratch;
  const MasterEqSpec& spec = prepared(spec_in, scratch);
  IntegrateResult res;
  res.rho = hermitian_part(rho0);
  double t = opt.t0;
  const double span = t_end - opt.t0;
  std::vector<double> samples = opt.sample_times;
  std::sort(samples.begin(), samples.end());
  size_t next_sample = 0;
  auto emit_until = [&](double now) {
    while (next_sample < samples.size() && samples[next_sample] <= now + 1e-12 * std::max(1.0, std::abs(now))) {
      res.samples.push_back({samples[next_sample], res.rho});
      ++next_sample;
    }
  };
  emit_until(t);
  if (span <= 0) return res;

  // Dormand–Prince 5(4) tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto f = [&](double tt, const Mat& r) { return partial_rwa_rhs(tt, r, spec); };

  double h = opt.h_init;
  if (h <= 0) {
    double scale = 0;
    for (const DecayChannel& c : spec.channels) scale = std::max(scale, 2 * c.rate);
    if (spec.picture == Picture::Schroedinger) {
      const Mat& hm = spec.hamiltonian_at ? spec.hamiltonian_at(t) : spec.hamiltonian;
      if (hm.size()) scale = std::max(scale, hm.cwiseAbs().maxCoeff());
    }
    h = scale > 0 ? 0.01 / scale : span;
  }
  h = std::min(h, span);
  const double h_min = opt.h_min * std::abs(span);

  Mat k1 = f(t, res.rho);
  while (t < t_end) {
    if (res.accepted + res.rejected > opt.max_steps) throw StepSizeUnderflow("integrate_master: step budget exhausted");
    double step = std::min(h, t_end - t);
    if (next_sample < samples.size()) step = std::min(step, samples[next_sample] - t);
    if (step < h_min && t_end - t > h_min) throw StepSizeUnderflow("integrate_master: step size underflow");
    const Mat& y = res.rho;
    Mat k2 = f(t + c2 * step, y + step * (a21 * k1));
    Mat k3 = f(t + c3 * step, y + step * (a31 * k1 + a32 * k2));
    Mat k4 = f(t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3));
    Mat k5 = f(t + c5 * step, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Mat k6 = f(t + step, y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Mat y5 = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Mat k7 = f(t + step, y5);
    Mat err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err_norm = err.cwiseAbs().maxCoeff() / opt.tol;
    if (err_norm <= 1.0) {
      t += step;
      res.rho = hermitian_part(y5);
      // FSAL is invalidated by the symmetrization only at round-off level.
      k1 = k7;
      ++res.accepted;
      emit_until(t);
    } else {
      ++res.rejected;
    }
    const double factor = err_norm > 0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
    h = step * std::clamp(factor, 0.2, 5.0);
  }
  return res;
}

Mat to_schroedinger(const Mat& rho_tilde, const Mat& h, double t) {
  const Mat u = propagator(h, t);
  return u * rho_tilde * u.adjoint();
}

Mat to_interaction(const Mat& rho, const Mat& h, double t) {
  const Mat u = propagator(h, t);
  return u.adjoint() * rho * u;
}

Mat final_nuclear_state_closed_form(const Mat& rho0) {
  Mat ex;
  if (rho0.rows() == kDim && rho0.cols() == kDim) {
    const double ground_weight = rho0.topLeftCorner(4, 4).cwiseAbs().maxCoeff() +
                                 rho0.topRightCorner(4, kExcitedDim).cwiseAbs().maxCoeff();
    if (ground_weight > 1e-12) throw UnsupportedSupport("closed-form decay requires an excited-block state");
    ex = rho0.bottomRightCorner(kExcitedDim, kExcitedDim);
  } else if (rho0.rows() == kExcitedDim && rho0.cols() == kExcitedDim) {
    ex = rho0;
  } else {
    throw DimensionMismatch("closed-form decay expects a 12x12 or 16x16 density matrix");
  }
  auto at = [&](Sublevel j, int a, int b) { return ex(4 * index(j) + a, 4 * index(j) + b); };
  auto flip = [](int nuc) { return nuc ^ 3; };  // ↓↑ ↔ ↑↓
  Mat out = Mat::Zero(4, 4);
  for (int a : {DD, UU}) {
    for (Sublevel j : kSublevels) out(a, a) += at(j, a, a);
  }
  for (int a : {DU, UD})
    for (int b : {DU, UD}) {
      out(a, b) += at(Sublevel::Zero, a, b);
      for (Sublevel j : {Sublevel::Minus, Sublevel::Plus})
        out(a, b) += 0.5 * (at(j, a, b) + at(j, flip(a), flip(b)));
    }
  return out;
}

Mat ground_state_block(const Mat& rho16) { return rho16.topLeftCorner(4, 4); }

double excited_population(const Mat& rho16) {
  return rho16.bottomRightCorner(kExcitedDim, kExcitedDim).trace().real();
}

Mat nuclear_state(const Mat& rho16) {
  Mat g = hermitian_part(ground_state_block(rho16));
  const double tr = g.trace().real();
  if (tr <= 0) throw InvalidState("no ground-block population to form a nuclear state");
  return g / tr;
}

Mat rotating_frame(const Mat& state_or_op, double phi, double phi_prime, double t) {
  const SpinOperators& s = spin_operators();
  Vec diag(4);
  for (int k = 0; k < 4; ++k)
    diag(k) = std::exp(-I * (s.Sz_n(k, k).real() * phi + s.Sz_np(k, k).real() * phi_prime) * t);
  if (state_or_op.cols() == 1) return diag.asDiagonal() * state_or_op;
  return diag.asDiagonal() * state_or_op * diag.conjugate().asDiagonal();
}

Mat rotating_frame_hamiltonian(const Mat& h4, double phi, double phi_prime) {
  const SpinOperators& s = spin_operators();
  return h4 - phi * s.Sz_n - phi_prime * s.Sz_np;
}

std::vector<double> channel_weights(const std::vector<DecayChannel>& ch, const Mat& rho0) {
  std::vector<double> w;
  for (const DecayChannel& c : ch) w.push_back((c.op * rho0 * c.op.adjoint()).trace().real());
  return w;
}

std::vector<double> emission_spectrum(const std::vector<DecayChannel>& ch, const std::vector<double>& grid,
                                      const std::vector<double>& weights) {
  std::vector<double> out(grid.size(), 0.0);
  for (size_t i = 0; i < ch.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights.at(i);
    const double g = 2 * ch[i].rate;
    for (size_t k = 0; k < grid.size(); ++k) {
      const double d = grid[k] - ch[i].frequency;
      out[k] += w * g / (d * d + g * g);
    }
  }
  return out;
}

}  // namespace tripent
