#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "harnack/drift.hpp"
#include "harnack/observable.hpp"
#include "harnack/sde.hpp"
#include "harnack/spectral_model.hpp"
#include "harnack/stats.hpp"

namespace harnack {

struct SemigroupSetup {
  OperatorPair pair = build_pair(dirichlet_spectrum(16), 0.5, 1.0);
  Drift drift = Drift::zero();
  // Largest allowed time step; the zero drift is stepped exactly in one step per segment.
  double dt = 1.0 / 64.0;
  Scheme scheme = Scheme::exponential;
  // When false the zero drift is stepped on the dt grid too, so its noise matches other drifts path by path.
  bool coarse_zero_steps = true;

  // Coarsest uniform grid on [0, max(times)] with step <= dt that contains every requested time.
  // The zero drift is stepped exactly, so only the alignment constraint applies there.
  TimeGrid grid_for(std::span<const double> times) const;
};

using EndpointVisitor = std::function<void(std::size_t start, std::size_t slot, std::size_t path,
                                           std::span<const double> state)>;

// Simulates in chunks of paths (noise stays keyed by the global path index) and calls `visit`
// serially, in (chunk, start, slot, path) order, for every recorded endpoint.
void for_each_endpoint(const SemigroupSetup& setup, std::span<const Vec> xs, std::span<const double> times,
                       std::size_t M, std::uint64_t seed, const EndpointVisitor& visit,
                       std::size_t chunk = 1u << 14);

// Endpoints at each requested time for every initial condition, under one shared noise plan.
// Result[s] is the ensemble started from xs[s], recording exactly the requested times (sorted).
std::vector<PathEnsemble> simulate_endpoints(const SemigroupSetup& setup, std::span<const Vec> xs,
                                             std::span<const double> times, std::size_t M, std::uint64_t seed);

// Sample of phi over the ensemble at a recorded slot.
Vec observable_samples(const PathEnsemble& ens, std::size_t slot, const Observable& phi);

Estimate estimate_Pt(const SemigroupSetup& setup, const Observable& phi, std::span<const double> x, double t,
                     std::size_t M, std::uint64_t seed);

// N phi = 1/2 Tr[C D^2 phi] + <Ax + F(x), D phi>.
double apply_generator(const SemigroupSetup& setup, const Observable& phi, std::span<const double> x);

struct GeneratorRow {
  double dt = 0.0;
  std::size_t M = 0;
  Estimate quotient;
  double generator = 0.0;
  double error = 0.0;
};

struct GeneratorReport {
  std::vector<GeneratorRow> rows;
  // error[i] / error[i+1].
  Vec error_ratios;
  bool decreasing = true;
};

// Difference quotient (P(dt) phi(x) - phi(x))/dt against N phi(x); M_i = round(m_scale / dt_i^2).
GeneratorReport generator_consistency(const SemigroupSetup& setup, const Observable& phi, std::span<const double> x,
                                      std::span<const double> dts, double m_scale, std::uint64_t seed,
                                      std::size_t max_M = 20'000'000);

// Central difference of P(t)phi along h / ||h||_C with step s in H_C norm, common random numbers.
Estimate directional_derivative_Pt(const SemigroupSetup& setup, const Observable& phi, std::span<const double> x,
                                   double t, std::span<const double> h, double fd_step, std::size_t M,
                                   std::uint64_t seed);

// M states approximating the invariant law: exact Gaussian draws for the zero drift, otherwise
// endpoints of runs of length burn_in started from the zero-drift invariant law.
std::vector<Vec> sample_invariant(const SemigroupSetup& setup, double burn_in, std::size_t M, std::uint64_t seed);

// Zero-drift closed forms.
struct GaussianProjection {
  double mean = 0.0;
  double variance = 0.0;
};

// Law of <X(t,x), d> for the zero drift.
GaussianProjection ou_projection(const OperatorPair& pair, std::span<const double> x, std::span<const double> d,
                                 double t);

// E cos(omega <X(t,x),d> + theta)^p for p in {1, 2, 4}.
double ou_cosine_moment(const OperatorPair& pair, std::span<const double> x, std::span<const double> d,
                        double omega, double theta, double t, int p);

}  // namespace harnack
