#pragma once

// State transfer between distant molecules with the mobile electron as a bus:
// SWAP with i, move to k, SWAP, move back, SWAP with i.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "peapod/physics.hpp"
#include "peapod/spin.hpp"

namespace peapod {

struct BusEvent {
  std::string action;  // "swap" or "transit"
  int site;            // swap partner, or transit destination
  double position_m;
  double start_s;
  double duration_s;
};

struct BusSchedule {
  int from_site = 0;
  int to_site = 0;
  std::vector<BusEvent> events;
  double total_duration_s = 0;
  // From the start of the first SWAP to the end of the third, while the
  // mobile spin carries quantum information.
  double coherent_duration_s = 0;
  double mobile_t2_s = 0;
};

struct BusTransferResult {
  BusSchedule schedule;
  double ideal_fidelity = 0;  // composed SWAPs against SWAP_ik (x) 1
  double decoherence_factor = 0;
  double fidelity = 0;
};

/// mobile_t2_s may be +infinity.
BusTransferResult bus_transfer(int i, int k, const RegisterConfig& config, double mobile_t2_s,
                               double swap_duration_s, double hop_speed_m_per_s);

/// SWAP_im SWAP_km SWAP_im on qubits (i, k, mobile).
Operator bus_swap_composite();

nlohmann::json to_json(const BusSchedule& schedule);

}  // namespace peapod
