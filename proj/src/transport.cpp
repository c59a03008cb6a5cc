#include "gflow/transport.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace gflow {

void interpolate_field(const Field& f, std::span<const double> x, std::span<double> out) {
  const ChartGrid& g = f.grid();
  const int n = g.dim();
  const int nc = f.ncomp();

  int base[kMaxDim];
  double frac[kMaxDim];
  for (int a = 0; a < n; ++a) {
    const double h = g.spacing(a);
    double xa = x[a];
    if (g.periodic(a)) {
      xa -= std::floor(xa);
      double cell = xa / h;
      int i = static_cast<int>(std::floor(cell));
      if (i >= g.size(a)) i -= g.size(a);
      base[a] = i;
      frac[a] = cell - std::floor(cell);
    } else {
      if (xa < 0.0) xa = 0.0;
      if (xa > 1.0) xa = 1.0;
      double cell = xa / h;
      int i = static_cast<int>(std::floor(cell));
      if (i > g.size(a) - 2) i = g.size(a) - 2;
      base[a] = i;
      frac[a] = cell - i;
    }
  }

  std::fill(out.begin(), out.end(), 0.0);
  const int corners = 1 << n;
  int multi[kMaxDim];
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      const int bit = (c >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      int idx = base[a] + bit;
      if (g.periodic(a) && idx >= g.size(a)) idx -= g.size(a);
      multi[a] = idx;
    }
    if (w == 0.0) continue;
    const std::size_t node = g.index(std::span<const int>(multi, n));
    const auto v = f.node_values(node);
    for (int k = 0; k < nc; ++k) out[k] += w * v[k];
  }
}

VectorField deturck_vector_field(const MetricField& gbar, const CovectorField& P) {
  const ChartGrid& g = gbar.grid();
  const int n = g.dim();
  const Sym2Field& ginv = gbar.inverse();
  VectorField out(gbar.grid_ptr());
  for (std::size_t node = 0; node < g.num_nodes(); ++node)
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += ginv.at(node, sym_index(n, i, j)) * P.v(node, j);
      out.v(node, i) = acc;
    }
  return out;
}

double p_tangency_residual(const MetricField& gbar, const CovectorField& P) {
  const ChartGrid& g = gbar.grid();
  const int n = g.dim();
  const int t = g.transverse_axis();
  const Sym2Field& ginv = gbar.inverse();
  double m = 0.0;
  for (Face face : {Face::lower, Face::upper})
    for (std::size_t k = 0; k < g.face_num_nodes(); ++k) {
      const std::size_t node = g.face_node(face, k);
      double pn = 0.0;
      for (int j = 0; j < n; ++j) pn += ginv.at(node, sym_index(n, t, j)) * P.v(node, j);
      m = std::max(m, std::abs(pn));
    }
  return m;
}

std::vector<VectorField> deturck_vector_trace(const FlowTrace& trace, const MetricField& ghat) {
  const ChristoffelField gamma_hat = christoffel(ghat);
  std::vector<VectorField> out;
  out.reserve(trace.steps());
  for (std::size_t s = 0; s < trace.steps(); ++s) {
    const MetricField gbar = metric_at_step(trace, s);
    const ChristoffelField gamma_bar = christoffel(gbar);
    const CovectorField P = deturck_covector(gbar, gamma_bar, gamma_hat);
    out.push_back(deturck_vector_field(gbar, P));
  }
  return out;
}

namespace {

double min_det_jacobian(const ChartGrid& g, const Field& jac, double t) {
  const int n = g.dim();
  Eigen::MatrixXd m(n, n);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = jac.at(node, i * n + j);
    const double det = m.determinant();
    if (det <= 0.0) throw JacobianDegenerate(node, t, det);
    best = std::min(best, det);
  }
  return best;
}

}  // namespace

Field diffeo_jacobian(const DiffeoTrace& psi, std::size_t step) {
  const ChartGrid& g = *psi.grid;
  const int n = g.dim();
  Field jac(psi.grid, n * n, 0.0);
  std::vector<Field> du;
  du.reserve(n);
  for (int a = 0; a < n; ++a) du.push_back(partial_derivative(psi.displacement[step], a));
  for (std::size_t node = 0; node < g.num_nodes(); ++node)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        jac.at(node, i * n + j) = (i == j ? 1.0 : 0.0) + du[j].at(node, i);
  return jac;
}

DiffeoTrace integrate_diffeo(const std::vector<VectorField>& p_trace,
                             const std::vector<double>& times, GridPtr grid) {
  if (p_trace.size() != times.size() || times.empty())
    throw ConfigError("deturck trace and times must align");
  const ChartGrid& g = *grid;
  const int n = g.dim();
  const int t_axis = g.transverse_axis();
  const double ht = g.spacing(t_axis);
  const double clamp_tol = ht * ht;

  DiffeoTrace out;
  out.grid = grid;
  out.times = times;
  out.displacement.reserve(times.size());
  out.displacement.emplace_back(grid, n, 0.0);
  out.min_det_jac.resize(times.size(), 1.0);

  std::vector<double> x(n), v(n), k1(n), k2(n), k3(n), k4(n), pos(n);

  // -P interpolated in space at psi and linearly in t between stored steps.
  auto eval = [&](const VectorField& pa, const VectorField& pb, double theta,
                  std::span<const double> y, std::span<double> res) {
    interpolate_field(pa, y, res);
    if (theta > 0.0) {
      interpolate_field(pb, y, v);
      for (int a = 0; a < n; ++a) res[a] = (1.0 - theta) * res[a] + theta * v[a];
    }
    for (int a = 0; a < n; ++a) res[a] = -res[a];
  };

  for (std::size_t s = 0; s + 1 < times.size(); ++s) {
    const double dt = times[s + 1] - times[s];
    const VectorField& pa = p_trace[s];
    const VectorField& pb = p_trace[s + 1];
    Field next(grid, n, 0.0);
    const Field& cur = out.displacement.back();
    for (std::size_t node = 0; node < g.num_nodes(); ++node) {
      g.coords(node, x);
      for (int a = 0; a < n; ++a) pos[a] = x[a] + cur.at(node, a);

      eval(pa, pb, 0.0, pos, k1);
      for (int a = 0; a < n; ++a) v[a] = pos[a] + 0.5 * dt * k1[a];
      std::vector<double> y1(v);
      eval(pa, pb, 0.5, y1, k2);
      for (int a = 0; a < n; ++a) v[a] = pos[a] + 0.5 * dt * k2[a];
      std::vector<double> y2(v);
      eval(pa, pb, 0.5, y2, k3);
      for (int a = 0; a < n; ++a) v[a] = pos[a] + dt * k3[a];
      std::vector<double> y3(v);
      eval(pa, pb, 1.0, y3, k4);

      for (int a = 0; a < n; ++a) {
        double p = pos[a] + dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        if (a == t_axis) {
          const double over = std::max(0.0 - p, p - 1.0);
          if (over > clamp_tol) throw BoundaryEscape(node, times[s + 1], over);
          if (p < 0.0) p = 0.0;
          if (p > 1.0) p = 1.0;
        }
        next.at(node, a) = p - x[a];
      }
    }
    out.displacement.push_back(std::move(next));
    const Field jac = diffeo_jacobian(out, s + 1);
    out.min_det_jac[s + 1] = min_det_jacobian(g, jac, times[s + 1]);
  }
  return out;
}

MetricField pullback_metric(const MetricField& gbar_at_t, const DiffeoTrace& psi, std::size_t step) {
  const ChartGrid& g = *psi.grid;
  const int n = g.dim();
  const Field jac = diffeo_jacobian(psi, step);
  const Field& u = psi.displacement[step];

  Sym2Field out(gbar_at_t.grid_ptr());
  std::vector<double> x(n), gv(sym_count(n));
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    g.coords(node, x);
    for (int a = 0; a < n; ++a) x[a] += u.at(node, a);
    interpolate_field(gbar_at_t.components(), x, gv);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            acc += jac.at(node, k * n + i) * jac.at(node, l * n + j) * gv[sym_index(n, k, l)];
        out.s(node, i, j) = acc;
      }
  }
  MetricField m(std::move(out));
  m.inverse();  // SPD check up front
  return m;
}

PullbackTrace pullback_trace(const FlowTrace& trace, const DiffeoTrace& psi) {
  PullbackTrace out;
  out.grid = trace.grid;
  out.times = trace.times;
  out.metrics.reserve(trace.steps());
  for (std::size_t s = 0; s < trace.steps(); ++s)
    out.metrics.push_back(pullback_metric(metric_at_step(trace, s), psi, s));
  return out;
}

std::vector<double> ricci_flow_residual(const PullbackTrace& trace) {
  const std::size_t m = trace.times.size();
  std::vector<double> out(m, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t s = 1; s + 1 < m; ++s) {
    const double two_dt = trace.times[s + 1] - trace.times[s - 1];
    const Sym2Field ric = ricci(trace.metrics[s]);
    double worst = 0.0;
    const auto& gp = trace.metrics[s + 1].components().data();
    const auto& gm = trace.metrics[s - 1].components().data();
    for (std::size_t k = 0; k < ric.data().size(); ++k) {
      const double r = (gp[k] - gm[k]) / two_dt + 2.0 * ric.data()[k];
      worst = std::max(worst, std::abs(r));
    }
    out[s] = worst;
  }
  return out;
}

std::vector<double> mean_curvature_check(const PullbackTrace& trace, const MuFunction& mu,
                                         double H0) {
  std::vector<double> out(trace.times.size(), 0.0);
  for (std::size_t s = 0; s < trace.times.size(); ++s) {
    const double target = mu(trace.times[s]) * H0;
    double err = 0.0;
    const ChristoffelField gamma = christoffel(trace.metrics[s]);
    for (Face face : {Face::lower, Face::upper}) {
      const FaceField h = mean_curvature(trace.metrics[s], gamma, face);
      for (std::size_t k = 0; k < h.count(); ++k) err = std::max(err, std::abs(h.at(k, 0) - target));
    }
    out[s] = err;
  }
  return out;
}

namespace {

// Multilinear interpolation of a face field at the tangential image of a face
// node under psi = x + u; every face axis is periodic.
void interpolate_face_sym(const ChartGrid& g, const FaceField& f, std::size_t node, const Field& u,
                          std::span<double> out) {
  const int n = g.dim();
  const int nb = n - 1;
  int base[kMaxDim];
  double frac[kMaxDim];
  for (int a = 0; a < nb; ++a) {
    const int ax = g.tangential_axis(a);
    double y = g.axis_coord(node, ax) + u.at(node, ax);
    const double h = g.spacing(ax);
    y -= std::floor(y);
    const double cell = y / h;
    int i = static_cast<int>(std::floor(cell));
    frac[a] = cell - i;
    if (i >= g.size(ax)) {
      i -= g.size(ax);
    }
    base[a] = i;
  }
  std::fill(out.begin(), out.end(), 0.0);
  int tidx[kMaxDim];
  for (int c = 0; c < (1 << nb); ++c) {
    double w = 1.0;
    for (int a = 0; a < nb; ++a) {
      const int bit = (c >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      int i = base[a] + bit;
      if (i >= g.size(g.tangential_axis(a))) i -= g.size(g.tangential_axis(a));
      tidx[a] = i;
    }
    if (w == 0.0) continue;
    std::size_t k = 0, mult = 1;
    for (int a = n - 1; a >= 0; --a) {
      if (a == g.transverse_axis()) continue;
      const int alpha = a - (a > g.transverse_axis() ? 1 : 0);
      k += static_cast<std::size_t>(tidx[alpha]) * mult;
      mult *= g.size(a);
    }
    for (std::size_t m = 0; m < out.size(); ++m) out[m] += w * f.at(k, static_cast<int>(m));
  }
}

}  // namespace

std::vector<double> boundary_pullback_check(const PullbackTrace& trace, const DiffeoTrace& psi,
                                            const std::array<FaceField, 2>& II_hat) {
  const ChartGrid& g = *trace.grid;
  const int n = g.dim();
  const int nb = n - 1;
  std::vector<double> out(trace.times.size(), 0.0);

  for (std::size_t s = 0; s < trace.times.size(); ++s) {
    double worst = 0.0;
    const ChristoffelField gamma = christoffel(trace.metrics[s]);
    const Field& u = psi.displacement[s];
    for (Face face : {Face::lower, Face::upper}) {
      const FaceField II_g = second_fundamental_form(trace.metrics[s], gamma, face);
      const FaceField& IIh = II_hat[static_cast<int>(face)];
      for (std::size_t k = 0; k < g.face_num_nodes(); ++k) {
        const std::size_t node = g.face_node(face, k);
        // Tangential pullback: (psi|face)^* II_hat with the Jacobian of the
        // tangential components of psi restricted to the face.
        double jac_t[kMaxDim][kMaxDim];
        for (int a = 0; a < nb; ++a) {
          const int ax_a = g.tangential_axis(a);
          const double h = g.spacing(ax_a);
          const std::size_t np = g.neighbor(node, ax_a, 1);
          const std::size_t nm = g.neighbor(node, ax_a, -1);
          for (int c = 0; c < nb; ++c) {
            const int ax_c = g.tangential_axis(c);
            const double duc = (u.at(np, ax_c) - u.at(nm, ax_c)) / (2.0 * h);
            jac_t[c][a] = (a == c ? 1.0 : 0.0) + duc;
          }
        }
        // II_hat at the image point, interpolated over the face torus.
        double ii_img[kMaxDim * (kMaxDim + 1) / 2];
        interpolate_face_sym(g, IIh, node, u, std::span<double>(ii_img, sym_count(nb)));
        for (int a = 0; a < nb; ++a)
          for (int b = a; b < nb; ++b) {
            double acc = 0.0;
            for (int c = 0; c < nb; ++c)
              for (int dd = 0; dd < nb; ++dd)
                acc += jac_t[c][a] * jac_t[dd][b] * ii_img[sym_index(nb, c, dd)];
            worst = std::max(worst, std::abs(II_g.at(k, sym_index(nb, a, b)) - acc));
          }
      }
    }
    out[s] = worst;
  }
  return out;
}

std::vector<double> convexity_monitor(const PullbackTrace& trace) {
  const int n = trace.grid->dim();
  std::vector<double> out(trace.times.size(), 0.0);
  for (std::size_t s = 0; s < trace.times.size(); ++s) {
    const ChristoffelField gamma = christoffel(trace.metrics[s]);
    double m = std::numeric_limits<double>::infinity();
    for (Face face : {Face::lower, Face::upper}) {
      const FaceField II = second_fundamental_form(trace.metrics[s], gamma, face);
      m = std::min(m, min_II_eigenvalue(II, n));
    }
    out[s] = m;
  }
  return out;
}

}  // namespace gflow
