#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/data.hpp"

namespace dkgp {

// Two ways to manufacture a desk-scale dataset: a GARCH(1,1) path with
// normal innovations (volatility clustering, no exploitable mean signal) and
// a two-regime nonlinear autoregression whose AR sign and noise scale flip
// with a sticky hidden regime (structure a sequence model can learn).
enum class SyntheticKind { garch, regime };

SyntheticKind synthetic_kind_from_name(const std::string& name);
std::string synthetic_kind_name(SyntheticKind kind);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::garch;

  // garch mode: h_t = k0 + rho1 h_{t-1} + alpha1 eps^2_{t-1}, normal shocks.
  double mu = 0.0;
  double k0 = 5e-5;
  double alpha1 = 0.10;
  double rho1 = 0.85;

  // regime mode: r_t = phi_s * tau * tanh(r_{t-1}/tau) + sigma_s * z_t with
  // phi_0 = +phi, phi_1 = -phi and sigma_1 = 2 sigma_0; the regime is a
  // 2-state Markov chain that stays put with probability `persist`.
  double persist = 0.98;
  double phi = 0.85;
  double tau = 0.02;
  double sigma0 = 0.01;

  std::string start_date = "2015-01-05";  // first trading day (a Monday)
};

// One ReturnSeries per stock, all sharing the same weekday calendar.
// Bitwise deterministic for a given (spec, n_stocks, n_days, seed).
std::vector<ReturnSeries> simulate_synthetic(const SyntheticSpec& spec,
                                             int n_stocks, int n_days,
                                             std::uint64_t seed);

// `n` weekday dates (ISO-8601) starting at `start`, skipping Sat/Sun.
std::vector<std::string> weekday_dates(const std::string& start, int n);

}  // namespace dkgp
