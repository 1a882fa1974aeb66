#include "qbattery/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include <Eigen/SparseLU>

#include "qbattery/error.hpp"

namespace qbat {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

bool is_diagonal(const SparseMat& m, double tol = 0.0) {
  for (Eigen::Index j = 0; j < m.outerSize(); ++j) {
    for (SparseMat::InnerIterator it(m, j); it; ++it) {
      if (it.row() != j && std::abs(it.value()) > tol) return false;
    }
  }
  return true;
}

Eigen::VectorXcd diagonal_of(const SparseMat& m) {
  Eigen::VectorXcd d = Eigen::VectorXcd::Zero(m.rows());
  for (Eigen::Index j = 0; j < m.outerSize(); ++j) {
    for (SparseMat::InnerIterator it(m, j); it; ++it) {
      if (it.row() == j) d(j) += it.value();
    }
  }
  return d;
}

SparseMat off_diagonal_of(const SparseMat& m) {
  SparseMat out = m;
  out.prune([](Eigen::Index r, Eigen::Index c, const Complex&) { return r != c; });
  return out;
}

// A sparse matrix split into runs along diagonals: stored values
// offset..offset+len-1 sit at (row0 + t, col0 + t).
struct DiagonalRuns {
  struct Run {
    Eigen::Index row0, col0, len, offset;
  };
  std::vector<Run> runs;
  std::vector<Eigen::Index> rows, cols;  // position of each stored value
};

DiagonalRuns split_runs(const SparseMat& m) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;  // (col - row, row)
  for (Eigen::Index j = 0; j < m.outerSize(); ++j) {
    for (SparseMat::InnerIterator it(m, j); it; ++it) entries.emplace_back(j - it.row(), it.row());
  }
  std::sort(entries.begin(), entries.end());
  DiagonalRuns d;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto [diag, row] = entries[k];
    const bool extends = k > 0 && entries[k - 1].first == diag && entries[k - 1].second + 1 == row;
    if (extends) {
      ++d.runs.back().len;
    } else {
      d.runs.push_back({row, row + diag, 1, static_cast<Eigen::Index>(k)});
    }
    d.rows.push_back(row);
    d.cols.push_back(row + diag);
  }
  return d;
}

// y += scale * A x for a single column, A given by runs and values. Real
// arithmetic keeps the inner loop vectorizable.
void apply_runs_column(const DiagonalRuns& d, const Complex* values, Complex scale, const Complex* x,
                       Complex* y) {
  const double sr = scale.real(), si = scale.imag();
  const double* __restrict xc = reinterpret_cast<const double*>(x);
  double* __restrict yc = reinterpret_cast<double*>(y);
  for (const auto& run : d.runs) {
    const double* v = reinterpret_cast<const double*>(values + run.offset);
    const double* xs = xc + 2 * run.col0;
    double* ys = yc + 2 * run.row0;
    for (Eigen::Index t = 0; t < 2 * run.len; t += 2) {
      const double vr = sr * v[t] - si * v[t + 1], vi = sr * v[t + 1] + si * v[t];
      const double xr = xs[t], xi = xs[t + 1];
      ys[t] += vr * xr - vi * xi;
      ys[t + 1] += vr * xi + vi * xr;
    }
  }
}

// y = A x column by column.
void apply_runs(const DiagonalRuns& d, const Complex* values, const DenseMat& x, DenseMat& y) {
  y.setZero();
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    apply_runs_column(d, values, Complex{1.0}, x.col(c).data(), y.col(c).data());
  }
}

// out = -i (m - m^dag) + w .* rho; the adjoint is taken in tiles so the
// transposed reads stay in cache.
void hermitian_combine(const DenseMat& m, const DenseMat& w, const DenseMat& rho, DenseMat& out) {
  constexpr Eigen::Index tile = 32;
  const Eigen::Index n = m.rows();
  out.resize(n, n);
  for (Eigen::Index jb = 0; jb < n; jb += tile) {
    const Eigen::Index bj = std::min(tile, n - jb);
    for (Eigen::Index ib = 0; ib < n; ib += tile) {
      const Eigen::Index bi = std::min(tile, n - ib);
      out.block(ib, jb, bi, bj) = m.block(jb, ib, bj, bi).adjoint();
    }
  }
  out = (out - m) * Complex{0.0, 1.0} + w.cwiseProduct(rho);
}

// Matrix-free generator. The dissipator and diagonal Hamiltonian collapse
// into an elementwise multiplier W; the rest is one sparse product plus
// L rho L^dag for non-diagonal jumps.
class Generator {
 public:
  Generator(const LindbladSpec& spec, Frame frame) : space_(spec.space) {
    const Eigen::Index dim = space_.total_dim();
    const SparseMat& hs = spec.hamiltonian_static.entries();
    energies_ = diagonal_of(hs).real();

    rotating_ = frame != Frame::Lab && rotating_eligible(spec);
    if (frame == Frame::Rotating && !rotating_) {
      throw ConfigError("rotating frame requested but the spec is not eligible");
    }

    // Elementwise part and diagonal anticommutator.
    w_ = DenseMat::Zero(dim, dim);
    SparseMat k_total(dim, dim);
    for (const auto& jump : spec.jumps) {
      if (jump.rate <= 0.0) continue;
      const SparseMat& l = jump.op.entries();
      k_total += SparseMat(l.adjoint() * l) * Complex{jump.rate};
      if (is_diagonal(l)) {
        Eigen::VectorXcd d = diagonal_of(l);
        w_ += jump.rate * (d * d.adjoint());
      } else {
        Jump j{split_runs(l), {}, SparseMat(l.adjoint()), jump.rate};
        for (std::size_t k = 0; k < j.runs.rows.size(); ++k) j.values.push_back(l.coeff(j.runs.rows[k], j.runs.cols[k]));
        jumps_.push_back(std::move(j));
      }
    }
    Eigen::VectorXcd kdiag = diagonal_of(k_total);
    for (Eigen::Index b = 0; b < dim; ++b) {
      for (Eigen::Index a = 0; a < dim; ++a) {
        Complex v = -0.5 * (kdiag(a) + kdiag(b));
        if (!rotating_) v += kMinusI * (energies_(a) - energies_(b));
        w_(a, b) += v;
      }
    }

    // Sparse coherent part S = H_offdiag - i K_offdiag / 2 + lambda * H_switched.
    SparseMat base = off_diagonal_of(k_total) * Complex{0.0, -0.5};
    if (!rotating_) base += off_diagonal_of(hs);
    const SparseMat& sw = spec.hamiltonian_switched.entries();
    SparseMat pattern = ones_like(base) + ones_like(sw);
    pattern.makeCompressed();
    runs_ = split_runs(pattern);
    std::map<long long, std::size_t> freq_index;
    for (std::size_t k = 0; k < runs_.rows.size(); ++k) {
      const Eigen::Index r = runs_.rows[k];
      const Eigen::Index j = runs_.cols[k];
      base_values_.push_back(base.coeff(r, j));
      const Complex s = sw.coeff(r, j);
      switched_values_.push_back(s);
      const double delta = rotating_ ? energies_(r) - energies_(j) : 0.0;
      const long long key = std::llround(delta * 1e9);
      auto [pos, inserted] = freq_index.emplace(key, frequencies_.size());
      if (inserted) frequencies_.push_back(delta);
      freq_slot_.push_back(pos->second);
      if (s != Complex{}) switched_nnz_.push_back({r, j, s, delta});
    }
    values_.resize(base_values_.size());
    m_.resize(dim, dim);
    phases_.resize(frequencies_.size());

    if (rotating_) {
      // Battery energies for the reduced-state phase; separability checked
      // in rotating_eligible.
      battery_energy_.resize(space_.battery_dim());
      for (Eigen::Index q = 0; q < space_.battery_dim(); ++q) battery_energy_(q) = energies_(space_.index(q, 0));
    }
  }

  bool rotating() const { return rotating_; }

  void apply(double t, double lambda, const DenseMat& rho, DenseMat& out) {
    if (!runs_.runs.empty()) {
      for (std::size_t f = 0; f < frequencies_.size(); ++f) {
        phases_[f] = std::polar(1.0, frequencies_[f] * t);
      }
      for (std::size_t k = 0; k < base_values_.size(); ++k) {
        values_[k] = base_values_[k] + lambda * switched_values_[k] * phases_[freq_slot_[k]];
      }
      apply_runs(runs_, values_.data(), rho, m_);
      hermitian_combine(m_, w_, rho, out);
    } else {
      out = w_.cwiseProduct(rho);
    }
    // out(:, b) += rate * sum_k conj(L(b, k)) L rho(:, k)
    for (const auto& j : jumps_) {
      for (Eigen::Index b = 0; b < j.adjoint.outerSize(); ++b) {
        for (SparseMat::InnerIterator it(j.adjoint, b); it; ++it) {
          apply_runs_column(j.runs, j.values.data(), j.rate * it.value(), rho.col(it.row()).data(),
                            out.col(b).data());
        }
      }
    }
  }

  // Lab <-> frame conversion: rho_lab = U rho_frame U^dag, U = exp(-i H0 t).
  void to_lab(double t, DenseMat& rho) const { rotate(-t, rho); }
  void to_frame(double t, DenseMat& rho) const { rotate(t, rho); }

  struct Reduced {
    DenseMat battery;
    Eigen::VectorXcd diag;
    Eigen::VectorXcd switched;  // rho_{col,row} at each switched entry

    friend Reduced operator+(const Reduced& a, const Reduced& b) {
      return {a.battery + b.battery, a.diag + b.diag, a.switched + b.switched};
    }
    friend Reduced operator-(const Reduced& a, const Reduced& b) {
      return {a.battery - b.battery, a.diag - b.diag, a.switched - b.switched};
    }
    friend Reduced operator*(double c, const Reduced& a) { return {c * a.battery, c * a.diag, c * a.switched}; }
  };

  Reduced reduce(const DenseMat& m) const {
    Reduced r;
    r.battery = partial_trace_cavity(space_, m);
    r.diag = m.diagonal();
    r.switched.resize(static_cast<Eigen::Index>(switched_nnz_.size()));
    for (std::size_t k = 0; k < switched_nnz_.size(); ++k) {
      r.switched(static_cast<Eigen::Index>(k)) = m(switched_nnz_[k].col, switched_nnz_[k].row);
    }
    return r;
  }

  Sample observe(double t, const Reduced& r) const {
    Sample s;
    s.t = t;
    s.rho_battery = r.battery;
    if (rotating_) {
      Eigen::VectorXcd p(space_.battery_dim());
      for (Eigen::Index q = 0; q < p.size(); ++q) p(q) = std::polar(1.0, -battery_energy_(q) * t);
      s.rho_battery = p.asDiagonal() * s.rho_battery * p.conjugate().asDiagonal();
    }
    s.populations = r.diag.real();
    Complex acc{};
    for (std::size_t k = 0; k < switched_nnz_.size(); ++k) {
      const auto& e = switched_nnz_[k];
      acc += e.value * std::polar(1.0, e.delta * t) * r.switched(static_cast<Eigen::Index>(k));
    }
    s.switched_expectation = acc;
    s.trace_error = std::abs(r.diag.sum() - Complex{1.0});
    s.truncation_tail = truncation_tail(space_, s.populations);
    return s;
  }

 private:
  struct Jump {
    DiagonalRuns runs;
    std::vector<Complex> values;
    SparseMat adjoint;
    double rate;
  };
  struct SwitchedEntry {
    Eigen::Index row;
    Eigen::Index col;
    Complex value;
    double delta;
  };

  static SparseMat ones_like(const SparseMat& m) {
    SparseMat out = m;
    for (Eigen::Index k = 0; k < out.nonZeros(); ++k) out.valuePtr()[k] = 1.0;
    return out;
  }

  bool rotating_eligible(const LindbladSpec& spec) const {
    if (!is_diagonal(spec.hamiltonian_static.entries(), 1e-14)) return false;
    const double tol = 1e-12;
    // H0 must split as battery + cavity energies for the reduced phases.
    for (Eigen::Index q = 0; q < space_.battery_dim(); ++q) {
      for (Eigen::Index n = 0; n < space_.cavity_dim(); ++n) {
        const double lhs = energies_(space_.index(q, n)) - energies_(space_.index(q, 0));
        const double rhs = energies_(space_.index(0, n)) - energies_(space_.index(0, 0));
        if (std::abs(lhs - rhs) > tol) return false;
      }
    }
    for (const auto& jump : spec.jumps) {
      const SparseMat& l = jump.op.entries();
      bool first = true;
      double shift = 0.0;
      for (Eigen::Index j = 0; j < l.outerSize(); ++j) {
        for (SparseMat::InnerIterator it(l, j); it; ++it) {
          const double d = energies_(it.row()) - energies_(j);
          if (first) {
            shift = d;
            first = false;
          } else if (std::abs(d - shift) > tol) {
            return false;
          }
        }
      }
    }
    return true;
  }

  void rotate(double t, DenseMat& rho) const {
    if (!rotating_ || t == 0.0) return;
    Eigen::VectorXcd p(energies_.size());
    for (Eigen::Index a = 0; a < p.size(); ++a) p(a) = std::polar(1.0, energies_(a) * t);
    rho = p.asDiagonal() * rho * p.conjugate().asDiagonal();
  }

  SpaceDescriptor space_;
  bool rotating_ = false;
  Eigen::VectorXd energies_;
  Eigen::VectorXd battery_energy_;
  DenseMat w_;
  DiagonalRuns runs_;
  std::vector<Complex> values_;
  std::vector<Complex> base_values_;
  std::vector<Complex> switched_values_;
  std::vector<double> frequencies_;
  std::vector<std::size_t> freq_slot_;
  std::vector<Complex> phases_;
  std::vector<SwitchedEntry> switched_nnz_;
  std::vector<Jump> jumps_;
  DenseMat m_;
};

// Dormand-Prince 5(4) tableau.
namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace dp

class Stepper {
 public:
  Stepper(Generator& gen, const IntegratorOptions& opt) : gen_(gen), opt_(opt) {}

  double error_norm(const DenseMat& err, const DenseMat& y0, const DenseMat& y1) const {
    const Complex* e = err.data();
    const Complex* a = y0.data();
    const Complex* b = y1.data();
    double s = 0.0;
    for (Eigen::Index k = 0; k < err.size(); ++k) {
      const double sc = opt_.atol + opt_.rtol * std::sqrt(std::max(std::norm(a[k]), std::norm(b[k])));
      s += std::norm(e[k]) / (sc * sc);
    }
    return std::sqrt(s / static_cast<double>(err.size()));
  }

  double scaled_norm(const DenseMat& v, const DenseMat& y) const {
    const auto sc = opt_.atol + opt_.rtol * y.cwiseAbs().array();
    return std::sqrt((v.cwiseAbs().array() / sc).square().sum() / static_cast<double>(v.size()));
  }

  double initial_step(double t, double lambda, const DenseMat& y, const DenseMat& f0, double span) {
    const double d0 = scaled_norm(y, y);
    const double d1 = scaled_norm(f0, y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    DenseMat y1 = y + h0 * f0;
    DenseMat f1;
    gen_.apply(t + h0, lambda, y1, f1);
    ++stats.rhs_evaluations;
    const double d2 = scaled_norm(f1 - f0, y) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100 * h0, h1, span});
  }

  /// Integrates y from t0 to t1 with constant lambda. Calls on_step(t, h)
  /// after each accepted step with dense-output coefficients available.
  template <typename OnStep>
  void run(double& t, double t1, double lambda, DenseMat& y, OnStep&& on_step) {
    if (!(t1 > t)) return;
    gen_.apply(t, lambda, y, k1);
    ++stats.rhs_evaluations;
    double h = opt_.initial_step > 0 ? opt_.initial_step : initial_step(t, lambda, y, k1, t1 - t);
    if (opt_.max_step > 0) h = std::min(h, opt_.max_step);
    double facold = 1e-4;
    constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9, facmin = 0.2, facmax = 10.0;
    bool last_rejected = false;
    std::size_t steps = 0;
    while (t < t1) {
      if (++steps > opt_.max_steps) throw NumericalError("integrate: maximum number of steps exceeded");
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        throw NumericalError("integrate: step size underflow at t = " + std::to_string(t));
      }
      if (t + h > t1 || t1 - (t + h) < 1e-12 * std::max(1.0, std::abs(t1))) h = t1 - t;
      using namespace dp;
      ys.noalias() = y + h * a21 * k1;
      gen_.apply(t + c2 * h, lambda, ys, k2);
      ys.noalias() = y + h * (a31 * k1 + a32 * k2);
      gen_.apply(t + c3 * h, lambda, ys, k3);
      ys.noalias() = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      gen_.apply(t + c4 * h, lambda, ys, k4);
      ys.noalias() = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      gen_.apply(t + c5 * h, lambda, ys, k5);
      ys.noalias() = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      gen_.apply(t + h, lambda, ys, k6);
      ynew.noalias() = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      gen_.apply(t + h, lambda, ynew, k7);
      stats.rhs_evaluations += 6;
      err.noalias() = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double en = error_norm(err, y, ynew);
      const double fac11 = std::pow(std::max(en, 1e-300), expo1);
      if (en <= 1.0) {
        double fac = fac11 / std::pow(facold, beta);
        fac = std::clamp(fac / safe, 1.0 / facmax, 1.0 / facmin);
        double hnew = h / fac;
        if (last_rejected) hnew = std::min(hnew, h);
        facold = std::max(en, 1e-4);
        ++stats.accepted_steps;
        stats.error_estimate += err.norm();
        step_h = h;
        step_t = t;
        on_step(t, h);
        y.swap(ynew);
        k1.swap(k7);
        t += h;
        if (t1 - t < 1e-12 * std::max(1.0, std::abs(t1))) t = t1;
        h = opt_.max_step > 0 ? std::min(hnew, opt_.max_step) : hnew;
        last_rejected = false;
      } else {
        h = h / std::min(1.0 / facmin, fac11 / safe);
        ++stats.rejected_steps;
        last_rejected = true;
      }
    }
  }

  /// Dense output coefficients for the step just accepted (before swap),
  /// through any linear map `f` so reduced data can be interpolated cheaply.
  template <typename T, typename F>
  void dense_coefficients(const DenseMat& y, std::array<T, 5>& rc, F&& f) {
    using namespace dp;
    const double h = step_h;
    const T fy = f(y), fk1 = f(k1), fk7 = f(k7);
    rc[0] = fy;
    rc[1] = f(ynew) - fy;
    rc[2] = h * fk1 - rc[1];
    rc[3] = rc[1] - h * fk7 - rc[2];
    rc[4] = h * (d1 * fk1 + d3 * f(k3) + d4 * f(k4) + d5 * f(k5) + d6 * f(k6) + d7 * fk7);
  }

  IntegrationStats stats;
  double step_h = 0.0;
  double step_t = 0.0;

 private:
  Generator& gen_;
  const IntegratorOptions& opt_;
  DenseMat k1, k2, k3, k4, k5, k6, k7, ys, ynew, err;
};

template <typename T>
T interpolate(const std::array<T, 5>& rc, double theta) {
  const double s = 1.0 - theta;
  return rc[0] + theta * (rc[1] + s * (rc[2] + theta * (rc[3] + s * rc[4])));
}

Generator::Reduced interpolate_reduced(const std::array<Generator::Reduced, 5>& rc, double theta) {
  const double s = 1.0 - theta;
  Generator::Reduced out;
  out.battery = rc[0].battery + theta * (rc[1].battery + s * (rc[2].battery + theta * (rc[3].battery + s * rc[4].battery)));
  out.diag = rc[0].diag + theta * (rc[1].diag + s * (rc[2].diag + theta * (rc[3].diag + s * rc[4].diag)));
  out.switched = rc[0].switched +
                 theta * (rc[1].switched + s * (rc[2].switched + theta * (rc[3].switched + s * rc[4].switched)));
  return out;
}

SparseMat kron(const SparseMat& a, const SparseMat& b) {
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (Eigen::Index ja = 0; ja < a.outerSize(); ++ja) {
    for (SparseMat::InnerIterator ia(a, ja); ia; ++ia) {
      for (Eigen::Index jb = 0; jb < b.outerSize(); ++jb) {
        for (SparseMat::InnerIterator ib(b, jb); ib; ++ib) {
          trips.emplace_back(ia.row() * b.rows() + ib.row(), ja * b.cols() + jb, ia.value() * ib.value());
        }
      }
    }
  }
  SparseMat out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SteadyStateResult finish_steady(const LindbladSpec& spec, DenseMat rho, double elapsed) {
  rho = 0.5 * (rho + rho.adjoint());
  const double residual = trace_norm_hermitian(liouvillian_apply(spec, 1, rho));
  return {DensityState{spec.space, std::move(rho), elapsed}, residual, elapsed};
}

SteadyStateResult steady_state_null_space(const LindbladSpec& spec, const SteadyStateOptions& opt) {
  const Eigen::Index dim = spec.space.total_dim();
  if (static_cast<std::size_t>(dim) > opt.null_space_max_dim) {
    throw ConfigError("steady_state: null-space method limited to total_dim <= " +
                      std::to_string(opt.null_space_max_dim) + " (got " + std::to_string(dim) + ")");
  }
  SparseMat id(dim, dim);
  id.setIdentity();
  const SparseMat h = (spec.hamiltonian_static + spec.hamiltonian_switched).entries();
  // Column-stacking: vec(A X B) = (B^T kron A) vec(X).
  SparseMat super = (kron(id, h) - kron(SparseMat(h.transpose()), id)) * kMinusI;
  for (const auto& j : spec.jumps) {
    const SparseMat& l = j.op.entries();
    SparseMat k = l.adjoint() * l;
    super += (kron(SparseMat(l.conjugate()), l) - 0.5 * kron(id, k) - 0.5 * kron(SparseMat(k.transpose()), id)) *
             Complex{j.rate};
  }
  // Replace the (0,0) equation by the trace condition.
  SparseMat without_first = super;
  without_first.prune([](Eigen::Index r, Eigen::Index, const Complex&) { return r != 0; });
  std::vector<Eigen::Triplet<Complex>> trace_row;
  for (Eigen::Index i = 0; i < dim; ++i) trace_row.emplace_back(0, i * dim + i, 1.0);
  SparseMat tr(dim * dim, dim * dim);
  tr.setFromTriplets(trace_row.begin(), trace_row.end());
  SparseMat system = without_first + tr;
  system.makeCompressed();

  Eigen::SparseLU<SparseMat> lu;
  lu.analyzePattern(system);
  lu.factorize(system);
  if (lu.info() != Eigen::Success) throw NumericalError("steady_state: sparse LU factorization failed");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim * dim);
  rhs(0) = 1.0;
  Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw NumericalError("steady_state: sparse LU solve failed");
  DenseMat rho = Eigen::Map<DenseMat>(x.data(), dim, dim);
  return finish_steady(spec, std::move(rho), 0.0);
}

SteadyStateResult steady_state_integration(const LindbladSpec& spec, const SteadyStateOptions& opt) {
  double min_rate = std::numeric_limits<double>::infinity();
  for (const auto& j : spec.jumps) {
    if (j.rate > 0.0) min_rate = std::min(min_rate, j.rate);
  }
  const double window = 10.0 / min_rate;
  const Eigen::Index dim = spec.space.total_dim();
  DensityState state = opt.initial ? *opt.initial
                                   : DensityState{spec.space, DenseMat::Identity(dim, dim) / static_cast<double>(dim), 0.0};
  IntegratorOptions iopt;
  iopt.rtol = 1e-10;
  iopt.atol = 1e-13;
  iopt.truncation_threshold = -1.0;
  const double t_start = state.time;
  while (state.time - t_start < opt.max_time) {
    DenseMat previous = state.rho;
    Trajectory tr = integrate(spec, state, state.time + window, {}, iopt);
    state = std::move(tr.final_state);
    const double change = trace_norm_hermitian(state.rho - previous);
    if (change < opt.convergence_tolerance) {
      SteadyStateResult res = finish_steady(spec, state.rho, state.time - t_start);
      if (res.residual <= opt.residual_tolerance) return res;
    }
  }
  throw NumericalError("steady_state: long-time integration did not converge within t = " +
                       std::to_string(opt.max_time));
}

}  // namespace

DenseMat liouvillian_apply(const LindbladSpec& spec, int lambda, const DenseMat& rho) {
  if (lambda != 0 && lambda != 1) throw ConfigError("liouvillian_apply: lambda must be 0 or 1");
  const Eigen::Index dim = spec.space.total_dim();
  if (rho.rows() != dim || rho.cols() != dim) throw ConfigError("liouvillian_apply: state shape mismatch");
  SparseMat h = spec.hamiltonian_static.entries();
  if (lambda == 1) h += spec.hamiltonian_switched.entries();
  DenseMat hr = h * rho;
  DenseMat out = kMinusI * (hr - DenseMat(rho * h));
  for (const auto& j : spec.jumps) {
    const SparseMat& l = j.op.entries();
    const SparseMat ladj = l.adjoint();
    const SparseMat k = ladj * l;
    DenseMat lr = l * rho;
    out += j.rate * (DenseMat(lr * ladj) - 0.5 * (DenseMat(k * rho) + DenseMat(rho * k)));
  }
  return out;
}

Trajectory integrate(const LindbladSpec& spec, const DensityState& rho0, double t_final,
                     std::span<const double> sample_times, const IntegratorOptions& options,
                     const LambdaSchedule& schedule) {
  if (!(options.rtol > 0.0) || !(options.atol > 0.0)) throw ConfigError("integrate: tolerances must be positive");
  if (!(rho0.space == spec.space)) throw ConfigError("integrate: state space does not match spec");
  schedule.validate();
  const double t0 = rho0.time;
  if (t_final < t0) throw ConfigError("integrate: t_final precedes the initial time");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < t0 - 1e-12 || sample_times[i] > t_final + 1e-12) {
      throw ConfigError("integrate: sample time outside the integration window");
    }
    if (i > 0 && !(sample_times[i] > sample_times[i - 1])) {
      throw ConfigError("integrate: sample times must be strictly increasing");
    }
  }

  Generator gen(spec, options.frame);
  Stepper stepper(gen, options);
  Trajectory out;
  out.stats.rotating_frame = gen.rotating();

  DenseMat y = rho0.rho;
  gen.to_frame(t0, y);
  double t = t0;
  std::size_t next = 0;

  auto record = [&](double ts, const Generator::Reduced& red, const DenseMat* full) {
    Sample s = gen.observe(ts, red);
    if (options.truncation_threshold >= 0.0 && s.truncation_tail > options.truncation_threshold) {
      char msg[160];
      std::snprintf(msg, sizeof msg, "integrate: truncation tail %.3g exceeds %.3g at t = %.6g; increase cavity_dim",
                    s.truncation_tail, options.truncation_threshold, ts);
      throw TruncationError(msg);
    }
    if (full) {
      DenseMat lab = *full;
      gen.to_lab(ts, lab);
      s.state = std::move(lab);
    }
    out.stats.max_trace_error = std::max(out.stats.max_trace_error, s.trace_error);
    out.stats.max_truncation_tail = std::max(out.stats.max_truncation_tail, s.truncation_tail);
    out.samples.push_back(std::move(s));
  };

  while (next < sample_times.size() && sample_times[next] <= t0 + 1e-12) {
    record(sample_times[next], gen.reduce(y), options.keep_states ? &y : nullptr);
    ++next;
  }

  // Segment boundaries from the schedule.
  std::vector<double> bounds{t0};
  for (double s : schedule.switch_times) {
    if (s > t0 && s < t_final) bounds.push_back(s);
  }
  bounds.push_back(t_final);

  std::array<DenseMat, 5> rc;
  std::array<Generator::Reduced, 5> rr;
  for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
    const double lambda = schedule.value_at(bounds[seg]);
    const double seg_end = bounds[seg + 1];
    stepper.run(t, seg_end, lambda, y, [&](double ts, double h) {
      const double tend = ts + h;
      if (next >= sample_times.size() || sample_times[next] > tend + 1e-12) return;
      if (options.keep_states) stepper.dense_coefficients(y, rc, [](const DenseMat& m) { return m; });
      stepper.dense_coefficients(y, rr, [&](const DenseMat& m) { return gen.reduce(m); });
      while (next < sample_times.size() && sample_times[next] <= tend + 1e-12) {
        const double theta = std::clamp((sample_times[next] - ts) / h, 0.0, 1.0);
        if (options.keep_states) {
          DenseMat full = interpolate(rc, theta);
          record(sample_times[next], interpolate_reduced(rr, theta), &full);
        } else {
          record(sample_times[next], interpolate_reduced(rr, theta), nullptr);
        }
        ++next;
      }
    });
    t = seg_end;
  }
  // Samples coinciding with the end of a zero-length window.
  while (next < sample_times.size()) {
    record(sample_times[next], gen.reduce(y), options.keep_states ? &y : nullptr);
    ++next;
  }

  const IntegrationStats diag = out.stats;
  out.stats = stepper.stats;
  out.stats.max_trace_error = diag.max_trace_error;
  out.stats.max_truncation_tail = diag.max_truncation_tail;
  out.stats.rotating_frame = diag.rotating_frame;

  gen.to_lab(t_final, y);
  out.final_state = DensityState{spec.space, std::move(y), t_final};
  return out;
}

std::string to_string(SteadyStateMethod m) {
  return m == SteadyStateMethod::Integration ? "integration" : "null-space";
}

SteadyStateMethod parse_steady_state_method(const std::string& s) {
  if (s == "integration" || s == "long-time") return SteadyStateMethod::Integration;
  if (s == "null-space" || s == "nullspace") return SteadyStateMethod::NullSpace;
  throw ConfigError("steady_state.method: unknown value '" + s + "' (expected integration or null-space)");
}

SteadyStateResult steady_state(const LindbladSpec& spec, const SteadyStateOptions& options) {
  const bool dissipative = std::any_of(spec.jumps.begin(), spec.jumps.end(), [](const auto& j) { return j.rate > 0; });
  if (!dissipative) throw ConfigError("steady_state: requires at least one nonzero dissipation rate");
  SteadyStateResult res = options.method == SteadyStateMethod::NullSpace ? steady_state_null_space(spec, options)
                                                                         : steady_state_integration(spec, options);
  if (res.residual > options.residual_tolerance) {
    throw NumericalError("steady_state: residual ||L rho||_1 = " + std::to_string(res.residual) + " exceeds " +
                         std::to_string(options.residual_tolerance));
  }
  return res;
}

OperatorMatrix excitation_number(const SpaceDescriptor& space) {
  OperatorMatrix spin = collective_spin(space, PauliKind::Z) +
                        OperatorMatrix::identity(space).scaled(0.5 * space.n_qubits());
  return boson_ops(space).n + spin;
}

double lyapunov_rate(const LindbladSpec& spec, const DenseMat& rho) {
  if (spec.model.interaction != Interaction::TavisCummings) {
    throw ConfigError("lyapunov_rate: the excitation-number rate formula holds for Tavis-Cummings only");
  }
  DensityState st{spec.space, rho, 0.0};
  const double photons = st.expectation(boson_ops(spec.space).n).real();
  OperatorMatrix spin = collective_spin(spec.space, PauliKind::Z) +
                        OperatorMatrix::identity(spec.space).scaled(0.5 * spec.space.n_qubits());
  const double excited = st.expectation(spin).real();
  return -spec.model.kappa * photons - spec.model.gamma_down * excited;
}

double numeric_excitation_rate(const LindbladSpec& spec, const DenseMat& rho) {
  DensityState d{spec.space, liouvillian_apply(spec, 1, rho), 0.0};
  return d.expectation(excitation_number(spec.space)).real();
}

}  // namespace qbat
