#include "psps/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace psps {
namespace {

using nlohmann::json;

// Raised while pulling one field out of the JSON tree; the outer loops
// collect these per entity so one bad record does not hide the next.
struct FieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const json& member(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FieldError(where + "." + key + ": missing");
  return *it;
}

double get_num(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_number()) throw FieldError(where + "." + key + ": expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw FieldError(where + "." + key + ": must be finite");
  return d;
}

int get_int(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_number_integer()) throw FieldError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

std::string get_str(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_string()) throw FieldError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_boolean()) throw FieldError(where + "." + key + ": expected a boolean");
  return v.get<bool>();
}

std::vector<double> get_num_array(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_array()) throw FieldError(where + "." + key + ": expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& e = v[i];
    std::string slot = where + "." + key + "[" + std::to_string(i) + "]";
    if (!e.is_number()) throw FieldError(slot + ": expected a number");
    double d = e.get<double>();
    if (!std::isfinite(d)) throw FieldError(slot + ": must be finite");
    out.push_back(d);
  }
  return out;
}

[[noreturn]] void fail(const std::vector<std::string>& problems) {
  std::string msg = "invalid case:";
  for (const auto& p : problems) {
    msg += "\n  - ";
    msg += p;
  }
  throw CaseError(msg);
}

template <class Entity, class Parse>
void parse_array(const json& root, const char* key, bool required, std::vector<Entity>& out,
                 std::vector<std::string>& problems, Parse parse) {
  auto it = root.find(key);
  if (it == root.end()) {
    if (required) problems.push_back(std::string(key) + ": missing");
    return;
  }
  if (!it->is_array()) {
    problems.push_back(std::string(key) + ": expected an array");
    return;
  }
  for (std::size_t i = 0; i < it->size(); ++i) {
    std::string where = std::string(key) + "[" + std::to_string(i) + "]";
    const json& rec = (*it)[i];
    if (!rec.is_object()) {
      problems.push_back(where + ": expected an object");
      continue;
    }
    try {
      out.push_back(parse(rec, where));
    } catch (const FieldError& e) {
      problems.push_back(e.what());
    }
  }
}

GridCase case_from_json(const json& root, std::vector<std::string>& problems) {
  GridCase c;
  if (!root.is_object()) {
    problems.push_back("top level: expected an object");
    return c;
  }

  auto meta_it = root.find("meta");
  if (meta_it == root.end() || !meta_it->is_object()) {
    problems.push_back("meta: missing or not an object");
  } else {
    try {
      c.meta.name = get_str(*meta_it, "name", "meta");
      c.meta.horizon_hours = get_int(*meta_it, "horizon_hours", "meta");
      if (meta_it->contains("theta_bound_rad"))
        c.meta.theta_bound_rad = get_num(*meta_it, "theta_bound_rad", "meta");
    } catch (const FieldError& e) {
      problems.push_back(e.what());
    }
  }

  parse_array<Bus>(root, "buses", true, c.buses, problems,
                   [](const json& r, const std::string& w) {
                     Bus b;
                     b.id = get_int(r, "id", w);
                     b.name = get_str(r, "name", w);
                     return b;
                   });

  parse_array<Line>(root, "lines", true, c.lines, problems,
                    [](const json& r, const std::string& w) {
                      Line l;
                      l.id = get_int(r, "id", w);
                      l.from = get_int(r, "from", w);
                      l.to = get_int(r, "to", w);
                      l.susceptance = get_num(r, "susceptance", w);
                      l.flow_max = get_num(r, "flow_max", w);
                      l.flow_min = r.contains("flow_min") ? get_num(r, "flow_min", w)
                                                          : -l.flow_max;
                      l.wfpi = get_num(r, "wfpi", w);
                      if (r.contains("ignition_prob"))
                        l.ignition_prob = get_num(r, "ignition_prob", w);
                      return l;
                    });

  parse_array<Generator>(root, "generators", true, c.generators, problems,
                         [](const json& r, const std::string& w) {
                           Generator g;
                           g.id = get_int(r, "id", w);
                           g.bus = get_int(r, "bus", w);
                           g.p_min = get_num(r, "p_min", w);
                           g.p_max = get_num(r, "p_max", w);
                           g.ramp_max = get_num(r, "ramp_max", w);
                           g.ramp_min = r.contains("ramp_min") ? get_num(r, "ramp_min", w)
                                                               : -g.ramp_max;
                           g.min_up = get_int(r, "min_up", w);
                           g.min_down = get_int(r, "min_down", w);
                           g.marginal_cost = get_num(r, "marginal_cost", w);
                           g.startup_cost = get_num(r, "startup_cost", w);
                           g.shutdown_cost = get_num(r, "shutdown_cost", w);
                           g.initial_on = get_bool(r, "initial_on", w);
                           return g;
                         });

  parse_array<Demand>(root, "demands", true, c.demands, problems,
                      [](const json& r, const std::string& w) {
                        Demand d;
                        d.id = get_int(r, "id", w);
                        d.bus = get_int(r, "bus", w);
                        d.voll = get_num(r, "voll", w);
                        d.profile = get_num_array(r, "profile", w);
                        return d;
                      });

  parse_array<Storage>(root, "storages", false, c.storages, problems,
                       [](const json& r, const std::string& w) {
                         Storage s;
                         s.id = get_int(r, "id", w);
                         s.bus = get_int(r, "bus", w);
                         s.charge_max = get_num(r, "charge_max", w);
                         s.discharge_max = get_num(r, "discharge_max", w);
                         s.capacity = get_num(r, "capacity", w);
                         s.eff_charge = get_num(r, "eff_charge", w);
                         s.eff_discharge = get_num(r, "eff_discharge", w);
                         return s;
                       });

  return c;
}

template <class Entity>
void check_unique_ids(const std::vector<Entity>& items, const char* what,
                      std::vector<std::string>& problems) {
  std::set<int> seen;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (!seen.insert(items[i].id).second)
      problems.push_back(std::string(what) + "[" + std::to_string(i) + "]: duplicate id " +
                         std::to_string(items[i].id));
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::vector<std::string> validate_case(const GridCase& c) {
  std::vector<std::string> problems;
  auto bad = [&problems](const std::string& what, std::size_t i, int id, const std::string& why) {
    problems.push_back(what + "[" + std::to_string(i) + "] (id " + std::to_string(id) + "): " +
                       why);
  };

  if (c.meta.horizon_hours < 1) problems.push_back("meta.horizon_hours: must be at least 1");
  if (!finite(c.meta.theta_bound_rad) || c.meta.theta_bound_rad <= 0.0)
    problems.push_back("meta.theta_bound_rad: must be a positive finite angle");

  if (c.buses.empty()) problems.push_back("buses: at least one bus is required");
  std::set<int> bus_ids;
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const Bus& b = c.buses[i];
    if (!bus_ids.insert(b.id).second) bad("buses", i, b.id, "duplicate id");
  }
  const int nbus = static_cast<int>(c.buses.size());
  if (static_cast<int>(bus_ids.size()) == nbus && !c.buses.empty()) {
    if (*bus_ids.begin() != 1 || *bus_ids.rbegin() != nbus)
      problems.push_back("buses: ids must be contiguous 1.." + std::to_string(nbus));
  }
  auto known_bus = [&bus_ids](int id) { return bus_ids.count(id) != 0; };

  check_unique_ids(c.lines, "lines", problems);
  for (std::size_t i = 0; i < c.lines.size(); ++i) {
    const Line& l = c.lines[i];
    if (!known_bus(l.from)) bad("lines", i, l.id, "from references unknown bus " + std::to_string(l.from));
    if (!known_bus(l.to)) bad("lines", i, l.id, "to references unknown bus " + std::to_string(l.to));
    if (l.from == l.to) bad("lines", i, l.id, "from and to reference the same bus");
    if (!finite(l.susceptance)) bad("lines", i, l.id, "susceptance must be finite");
    if (!finite(l.flow_min) || !finite(l.flow_max) || l.flow_min > 0.0 || l.flow_max < 0.0)
      bad("lines", i, l.id, "flow limits must satisfy flow_min <= 0 <= flow_max");
    if (!finite(l.wfpi) || l.wfpi < 0.0 || l.wfpi > 150.0)
      bad("lines", i, l.id, "wfpi must lie in [0, 150]");
    if (l.ignition_prob &&
        (!finite(*l.ignition_prob) || *l.ignition_prob < 0.0 || *l.ignition_prob >= 1.0))
      bad("lines", i, l.id, "ignition_prob must lie in [0, 1)");
  }

  check_unique_ids(c.generators, "generators", problems);
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    const Generator& g = c.generators[i];
    if (!known_bus(g.bus)) bad("generators", i, g.id, "references unknown bus " + std::to_string(g.bus));
    if (!finite(g.p_min) || !finite(g.p_max) || g.p_min < 0.0 || g.p_min > g.p_max)
      bad("generators", i, g.id, "power limits must satisfy 0 <= p_min <= p_max");
    if (!finite(g.ramp_min) || !finite(g.ramp_max) || g.ramp_min > 0.0 || g.ramp_max < 0.0)
      bad("generators", i, g.id, "ramp limits must satisfy ramp_min <= 0 <= ramp_max");
    if (g.min_up < 1) bad("generators", i, g.id, "min_up must be at least 1 hour");
    if (g.min_down < 1) bad("generators", i, g.id, "min_down must be at least 1 hour");
    if (!finite(g.marginal_cost) || g.marginal_cost < 0.0)
      bad("generators", i, g.id, "marginal_cost must be non-negative");
    if (!finite(g.startup_cost) || g.startup_cost < 0.0)
      bad("generators", i, g.id, "startup_cost must be non-negative");
    if (!finite(g.shutdown_cost) || g.shutdown_cost < 0.0)
      bad("generators", i, g.id, "shutdown_cost must be non-negative");
  }

  check_unique_ids(c.demands, "demands", problems);
  for (std::size_t i = 0; i < c.demands.size(); ++i) {
    const Demand& d = c.demands[i];
    if (!known_bus(d.bus)) bad("demands", i, d.id, "references unknown bus " + std::to_string(d.bus));
    if (!finite(d.voll) || d.voll < 0.0) bad("demands", i, d.id, "voll must be non-negative");
    if (static_cast<int>(d.profile.size()) != c.meta.horizon_hours)
      bad("demands", i, d.id,
          "profile has " + std::to_string(d.profile.size()) + " hours, horizon is " +
              std::to_string(c.meta.horizon_hours));
    for (std::size_t t = 0; t < d.profile.size(); ++t)
      if (!finite(d.profile[t]) || d.profile[t] < 0.0) {
        bad("demands", i, d.id, "profile[" + std::to_string(t) + "] must be non-negative");
        break;
      }
  }

  check_unique_ids(c.storages, "storages", problems);
  for (std::size_t i = 0; i < c.storages.size(); ++i) {
    const Storage& s = c.storages[i];
    if (!known_bus(s.bus)) bad("storages", i, s.id, "references unknown bus " + std::to_string(s.bus));
    if (!finite(s.charge_max) || s.charge_max < 0.0 || !finite(s.discharge_max) ||
        s.discharge_max < 0.0)
      bad("storages", i, s.id, "charge_max and discharge_max must be non-negative");
    if (!finite(s.capacity) || s.capacity <= 0.0) bad("storages", i, s.id, "capacity must be positive");
    if (!finite(s.eff_charge) || s.eff_charge <= 0.0 || s.eff_charge > 1.0 ||
        !finite(s.eff_discharge) || s.eff_discharge <= 0.0 || s.eff_discharge > 1.0)
      bad("storages", i, s.id, "efficiencies must lie in (0, 1]");
  }

  return problems;
}

GridCase parse_case(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw CaseError(std::string("invalid case: ") + e.what());
  }

  std::vector<std::string> problems;
  GridCase c = case_from_json(root, problems);
  if (problems.empty()) {
    auto more = validate_case(c);
    problems.insert(problems.end(), more.begin(), more.end());
  }
  if (!problems.empty()) fail(problems);

  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(c.buses.begin(), c.buses.end(), by_id);
  std::sort(c.lines.begin(), c.lines.end(), by_id);
  std::sort(c.generators.begin(), c.generators.end(), by_id);
  std::sort(c.demands.begin(), c.demands.end(), by_id);
  std::sort(c.storages.begin(), c.storages.end(), by_id);
  return c;
}

GridCase load_case(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CaseError("cannot open case file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_case(buf.str());
  } catch (const CaseError& e) {
    throw CaseError(path + ": " + e.what());
  }
}

std::string serialize_case(const GridCase& c) {
  json root;
  root["meta"] = {{"name", c.meta.name},
                  {"horizon_hours", c.meta.horizon_hours},
                  {"theta_bound_rad", c.meta.theta_bound_rad}};

  root["buses"] = json::array();
  for (const Bus& b : c.buses) root["buses"].push_back({{"id", b.id}, {"name", b.name}});

  root["lines"] = json::array();
  for (const Line& l : c.lines) {
    json rec{{"id", l.id},
             {"from", l.from},
             {"to", l.to},
             {"susceptance", l.susceptance},
             {"flow_min", l.flow_min},
             {"flow_max", l.flow_max},
             {"wfpi", l.wfpi}};
    if (l.ignition_prob) rec["ignition_prob"] = *l.ignition_prob;
    root["lines"].push_back(std::move(rec));
  }

  root["generators"] = json::array();
  for (const Generator& g : c.generators)
    root["generators"].push_back({{"id", g.id},
                                  {"bus", g.bus},
                                  {"p_min", g.p_min},
                                  {"p_max", g.p_max},
                                  {"ramp_min", g.ramp_min},
                                  {"ramp_max", g.ramp_max},
                                  {"min_up", g.min_up},
                                  {"min_down", g.min_down},
                                  {"marginal_cost", g.marginal_cost},
                                  {"startup_cost", g.startup_cost},
                                  {"shutdown_cost", g.shutdown_cost},
                                  {"initial_on", g.initial_on}});

  root["demands"] = json::array();
  for (const Demand& d : c.demands)
    root["demands"].push_back(
        {{"id", d.id}, {"bus", d.bus}, {"voll", d.voll}, {"profile", d.profile}});

  if (!c.storages.empty()) {
    root["storages"] = json::array();
    for (const Storage& s : c.storages)
      root["storages"].push_back({{"id", s.id},
                                  {"bus", s.bus},
                                  {"charge_max", s.charge_max},
                                  {"discharge_max", s.discharge_max},
                                  {"capacity", s.capacity},
                                  {"eff_charge", s.eff_charge},
                                  {"eff_discharge", s.eff_discharge}});
  }

  return root.dump(2) + "\n";
}

namespace {

template <class Entity>
int pos_by_id(const std::vector<Entity>& items, int id, const char* what) {
  auto it = std::lower_bound(items.begin(), items.end(), id,
                             [](const Entity& e, int key) { return e.id < key; });
  if (it == items.end() || it->id != id)
    throw std::out_of_range(std::string("unknown ") + what + " id " + std::to_string(id));
  return static_cast<int>(it - items.begin());
}

}  // namespace

int GridCase::bus_pos(int bus_id) const { return pos_by_id(buses, bus_id, "bus"); }
int GridCase::line_pos(int line_id) const { return pos_by_id(lines, line_id, "line"); }
int GridCase::gen_pos(int gen_id) const { return pos_by_id(generators, gen_id, "generator"); }
int GridCase::demand_pos(int demand_id) const { return pos_by_id(demands, demand_id, "demand"); }

double total_wfpi(const GridCase& c, const std::vector<int>& energized_lines) {
  std::set<int> unique(energized_lines.begin(), energized_lines.end());
  double sum = 0.0;
  for (int id : unique) sum += c.lines[static_cast<std::size_t>(c.line_pos(id))].wfpi;
  return sum;
}

std::vector<std::vector<int>> islands(const GridCase& c, const std::vector<int>& energized_lines) {
  const int n = static_cast<int>(c.buses.size());
  std::vector<int> parent(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
  auto find = [&parent](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  };

  std::set<int> unique(energized_lines.begin(), energized_lines.end());
  for (int id : unique) {
    auto it = std::lower_bound(c.lines.begin(), c.lines.end(), id,
                               [](const Line& l, int key) { return l.id < key; });
    if (it == c.lines.end() || it->id != id) continue;
    int a = find(c.bus_pos(it->from));
    int b = find(c.bus_pos(it->to));
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }

  // Buses are sorted by id, so scanning positions in order yields components
  // keyed and ordered by their smallest bus id.
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> out;
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    if (slot[static_cast<std::size_t>(r)] < 0) {
      slot[static_cast<std::size_t>(r)] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(slot[static_cast<std::size_t>(r)])].push_back(
        c.buses[static_cast<std::size_t>(i)].id);
  }
  return out;
}

GridCase slice_hours(const GridCase& c, int first_hour, int count) {
  if (first_hour < 0 || count < 1 || first_hour + count > c.meta.horizon_hours)
    throw std::out_of_range("hour window [" + std::to_string(first_hour) + ", " +
                            std::to_string(first_hour + count) + ") does not fit a horizon of " +
                            std::to_string(c.meta.horizon_hours) + " hours");
  GridCase out = c;
  out.meta.horizon_hours = count;
  for (Demand& d : out.demands)
    d.profile.assign(d.profile.begin() + first_hour, d.profile.begin() + first_hour + count);
  return out;
}

}  // namespace psps
