#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace psps {

// Thrown by the case loader. The message carries every problem found in the
// file, one per line, so a broken case can be fixed in a single pass.
struct CaseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Bus {
  int id = 0;
  std::string name;

  friend bool operator==(const Bus&, const Bus&) = default;
};

struct Line {
  int id = 0;
  int from = 0;
  int to = 0;
  double susceptance = 0.0;  // per-unit on the 100 MVA system base
  double flow_min = 0.0;     // MW, non-positive
  double flow_max = 0.0;     // MW, non-negative
  double wfpi = 0.0;         // unitless fire-risk index in [0, 150]
  std::optional<double> ignition_prob;  // per-hour probability in [0, 1)

  friend bool operator==(const Line&, const Line&) = default;
};

struct Generator {
  int id = 0;
  int bus = 0;
  double p_min = 0.0;  // MW
  double p_max = 0.0;
  double ramp_min = 0.0;  // MW/h, non-positive
  double ramp_max = 0.0;
  int min_up = 1;    // hours
  int min_down = 1;
  double marginal_cost = 0.0;  // $/MWh
  double startup_cost = 0.0;   // $
  double shutdown_cost = 0.0;
  bool initial_on = false;

  friend bool operator==(const Generator&, const Generator&) = default;
};

struct Demand {
  int id = 0;
  int bus = 0;
  double voll = 0.0;            // $/MWh charged on unserved energy
  std::vector<double> profile;  // MW per hour, length = horizon

  friend bool operator==(const Demand&, const Demand&) = default;
};

struct Storage {
  int id = 0;
  int bus = 0;
  double charge_max = 0.0;     // MW
  double discharge_max = 0.0;  // MW
  double capacity = 0.0;       // MWh
  double eff_charge = 1.0;     // fraction in (0, 1]
  double eff_discharge = 1.0;

  friend bool operator==(const Storage&, const Storage&) = default;
};

struct CaseMeta {
  std::string name;
  int horizon_hours = 0;
  double theta_bound_rad = 0.6;  // symmetric bound on bus voltage angles

  friend bool operator==(const CaseMeta&, const CaseMeta&) = default;
};

/* Immutable after load_case/parse_case return: entity lists are sorted by
 * id, bus ids are contiguous 1..B, and every cross-reference has been
 * checked. Safe to share read-only across threads. */
struct GridCase {
  CaseMeta meta;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Demand> demands;
  std::vector<Storage> storages;

  int horizon() const { return meta.horizon_hours; }
  double theta_bound() const { return meta.theta_bound_rad; }

  // Position of a bus in `buses`; ids are contiguous so this is id - 1.
  // All four throw std::out_of_range on ids the case does not contain.
  int bus_pos(int bus_id) const;
  int line_pos(int line_id) const;
  int gen_pos(int gen_id) const;
  int demand_pos(int demand_id) const;

  friend bool operator==(const GridCase&, const GridCase&) = default;
};

// Reads and validates a case file. Parse problems and invariant violations
// both surface as CaseError; the latter lists every violation found.
GridCase load_case(const std::string& path);

// Same contract as load_case but from in-memory JSON text.
GridCase parse_case(const std::string& json_text);

// Inverse of parse_case: parse_case(serialize_case(c)) == c field for field.
std::string serialize_case(const GridCase& c);

// Every invariant the loader enforces, as one message per violation, for
// cases assembled in code rather than parsed. Empty result means valid.
std::vector<std::string> validate_case(const GridCase& c);

// Sum of wfpi over the given lines. Duplicates count once. Throws
// std::out_of_range on unknown line ids.
double total_wfpi(const GridCase& c, const std::vector<int>& energized_lines);

// Connected components of the subgraph induced by the energized lines.
// Every bus appears in exactly one component; components are ordered by
// their smallest bus id and sorted internally. Unknown line ids are ignored.
std::vector<std::vector<int>> islands(const GridCase& c,
                                      const std::vector<int>& energized_lines);

// Copy of the case covering hours [first_hour, first_hour + count) of the
// demand profiles, 0-based. Throws std::out_of_range when the window does
// not fit inside the horizon.
GridCase slice_hours(const GridCase& c, int first_hour, int count);

}  // namespace psps
