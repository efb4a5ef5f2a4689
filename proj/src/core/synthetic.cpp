#include "core/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace dkgp {

namespace {

std::chrono::sys_days parse_iso_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3) {
    throw InputError("bad ISO date '" + s + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) throw InputError("bad ISO date '" + s + "'");
  return std::chrono::sys_days{ymd};
}

std::string format_iso_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

}  // namespace

SyntheticKind synthetic_kind_from_name(const std::string& name) {
  if (name == "garch") return SyntheticKind::garch;
  if (name == "regime") return SyntheticKind::regime;
  throw InputError("unknown synthetic kind '" + name + "'");
}

std::string synthetic_kind_name(SyntheticKind kind) {
  return kind == SyntheticKind::garch ? "garch" : "regime";
}

std::vector<std::string> weekday_dates(const std::string& start, int n) {
  if (n < 0) throw InputError("weekday_dates: negative count");
  std::vector<std::string> out;
  out.reserve(n);
  std::chrono::sys_days day = parse_iso_date(start);
  while (static_cast<int>(out.size()) < n) {
    const std::chrono::weekday wd{day};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) {
      out.push_back(format_iso_date(day));
    }
    day += std::chrono::days{1};
  }
  return out;
}

std::vector<ReturnSeries> simulate_synthetic(const SyntheticSpec& spec,
                                             int n_stocks, int n_days,
                                             std::uint64_t seed) {
  if (n_stocks < 1) throw InputError("simulate_synthetic: n_stocks must be >= 1");
  if (n_days < 100) throw InputError("simulate_synthetic: n_days must be >= 100");
  if (spec.kind == SyntheticKind::garch) {
    if (!(spec.k0 > 0.0) || spec.alpha1 < 0.0 || spec.rho1 < 0.0 ||
        spec.alpha1 + spec.rho1 >= 1.0) {
      throw InputError("simulate_synthetic: garch params violate stationarity");
    }
  } else {
    if (!(spec.sigma0 > 0.0) || !(spec.tau > 0.0) ||
        !(spec.persist > 0.0 && spec.persist < 1.0)) {
      throw InputError("simulate_synthetic: bad regime params");
    }
  }

  const std::vector<std::string> dates = weekday_dates(spec.start_date, n_days);

  std::vector<ReturnSeries> out;
  out.reserve(n_stocks);
  for (int s = 0; s < n_stocks; ++s) {
    char id[16];
    std::snprintf(id, sizeof(id), "S%03d", s + 1);
    Rng rng(derive_seed(seed, std::string("synth/") + id));

    ReturnSeries series;
    series.stock_id = id;
    series.dates = dates;
    series.returns.resize(n_days);

    if (spec.kind == SyntheticKind::garch) {
      const double uncond = spec.k0 / (1.0 - spec.alpha1 - spec.rho1);
      double h = uncond;
      double eps = std::sqrt(h) * rng.normal();
      series.returns[0] = spec.mu + eps;
      for (int t = 1; t < n_days; ++t) {
        h = spec.k0 + spec.rho1 * h + spec.alpha1 * eps * eps;
        eps = std::sqrt(h) * rng.normal();
        series.returns[t] = spec.mu + eps;
      }
    } else {
      // Sticky 2-state Markov regime; state 1 flips the AR sign and doubles
      // the noise scale.
      int state = rng.uniform() < 0.5 ? 0 : 1;
      double prev = 0.0;
      for (int t = 0; t < n_days; ++t) {
        if (rng.uniform() > spec.persist) state = 1 - state;
        const double phi_s = state == 0 ? spec.phi : -spec.phi;
        const double sigma_s = state == 0 ? spec.sigma0 : 2.0 * spec.sigma0;
        const double r = phi_s * spec.tau * std::tanh(prev / spec.tau) +
                         sigma_s * rng.normal();
        series.returns[t] = r;
        prev = r;
      }
    }
    out.push_back(std::move(series));
  }
  return out;
}

}  // namespace dkgp
