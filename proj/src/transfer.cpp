#include "peapod/transfer.hpp"

#include <cmath>

#include "peapod/errors.hpp"

namespace peapod {

namespace {

BasisLayout bus_layout() {
  return BasisLayout({{{0, Role::electron}, SpinValue::half()},
                      {{1, Role::electron}, SpinValue::half()},
                      {{0, Role::mobile}, SpinValue::half()}});
}

Matrix swap4() {
  Matrix s = Matrix::Zero(4, 4);
  s(0, 0) = 1.0;
  s(1, 2) = 1.0;
  s(2, 1) = 1.0;
  s(3, 3) = 1.0;
  return s;
}

Operator swap_on(const BasisLayout& layout, SpinRef a, SpinRef b) {
  const SpinRef targets[] = {a, b};
  return embed(swap4(), std::span<const SpinRef>(targets), layout);
}

}  // namespace

Operator bus_swap_composite() {
  const auto layout = bus_layout();
  const SpinRef qi{0, Role::electron}, qk{1, Role::electron}, m{0, Role::mobile};
  const auto s_im = swap_on(layout, qi, m);
  const auto s_km = swap_on(layout, qk, m);
  return s_im * s_km * s_im;
}

BusTransferResult bus_transfer(int i, int k, const RegisterConfig& config, double mobile_t2_s,
                               double swap_duration_s, double hop_speed_m_per_s) {
  const auto n = static_cast<int>(config.size());
  if (i < 0 || k < 0 || i >= n || k >= n) throw InvalidInput("transfer sites lie outside the register");
  if (i == k) throw InvalidInput("bus transfer needs two different sites");
  if (!(mobile_t2_s > 0)) throw InvalidInput("mobile T2 must be positive");
  if (!(swap_duration_s > 0) || !std::isfinite(swap_duration_s)) {
    throw InvalidInput("SWAP duration must be positive");
  }
  if (!(hop_speed_m_per_s > 0) || !std::isfinite(hop_speed_m_per_s)) {
    throw InvalidInput("hop speed must be positive");
  }
  const double zi = config.positions_m[static_cast<std::size_t>(i)];
  const double zk = config.positions_m[static_cast<std::size_t>(k)];
  const double transit = std::abs(zk - zi) / hop_speed_m_per_s;

  BusTransferResult r;
  auto& s = r.schedule;
  s.from_site = i;
  s.to_site = k;
  s.mobile_t2_s = mobile_t2_s;
  double t = 0.0;
  const auto push = [&](const char* action, int site, double z, double d) {
    s.events.push_back({action, site, z, t, d});
    t += d;
  };
  push("swap", i, zi, swap_duration_s);
  push("transit", k, zk, transit);
  push("swap", k, zk, swap_duration_s);
  push("transit", i, zi, transit);
  push("swap", i, zi, swap_duration_s);
  s.total_duration_s = t;
  s.coherent_duration_s = s.events.back().start_s + s.events.back().duration_s - s.events.front().start_s;

  const auto layout = bus_layout();
  const auto target = swap_on(layout, {0, Role::electron}, {1, Role::electron});
  r.ideal_fidelity = unitary_fidelity(target, bus_swap_composite());
  r.decoherence_factor = std::isinf(mobile_t2_s) ? 1.0 : std::exp(-s.coherent_duration_s / mobile_t2_s);
  r.fidelity = r.ideal_fidelity * r.decoherence_factor;
  return r;
}

nlohmann::json to_json(const BusSchedule& schedule) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : schedule.events) {
    events.push_back({{"action", e.action},
                      {"site", e.site},
                      {"position_m", e.position_m},
                      {"start_s", e.start_s},
                      {"duration_s", e.duration_s}});
  }
  nlohmann::json j = {{"from_site", schedule.from_site},
                      {"to_site", schedule.to_site},
                      {"events", events},
                      {"total_duration_s", schedule.total_duration_s},
                      {"coherent_duration_s", schedule.coherent_duration_s}};
  if (std::isinf(schedule.mobile_t2_s)) {
    j["mobile_T2_s"] = nullptr;
  } else {
    j["mobile_T2_s"] = schedule.mobile_t2_s;
  }
  return j;
}

}  // namespace peapod
