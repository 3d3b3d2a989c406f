#include "coordfeas/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>
#include <variant>

#include "coordfeas/errors.hpp"
#include "json.hpp"

namespace coordfeas {

namespace {

using nlohmann::json;

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string at(const std::string& base, int k) {
  return base + "[" + std::to_string(k) + "]";
}

[[noreturn]] void bail(const std::string& path, const std::string& what) {
  throw ParseError(what, path);
}

// Strict object view: every consumed key is remembered and finish() rejects
// the rest, so typos surface with their full path.
class Object {
 public:
  Object(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bail(path_, "expected an object");
  }
  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& require(const char* key) {
    const json* p = find(key);
    if (p == nullptr) bail(join(path_, key), "missing required field");
    return *p;
  }
  void finish() const {
    for (const auto& item : j_.items()) {
      if (seen_.count(item.key()) == 0) bail(join(path_, item.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) bail(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bail(path, "expected an integer");
  return j.get<int>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) bail(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) bail(path, "expected a string");
  return j.get<std::string>();
}

std::uint64_t as_seed(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return j.get<std::uint64_t>();
  bail(path, "expected a nonnegative integer");
}

Vec as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) bail(path, "expected an array of numbers");
  Vec v(static_cast<int>(j.size()));
  for (int k = 0; k < static_cast<int>(j.size()); ++k) {
    v(k) = as_double(j[static_cast<size_t>(k)], at(path, k));
  }
  return v;
}

TimeFunction parse_reference(const json& j, const std::string& path) {
  Object obj(j, path);
  const std::string type = as_string(obj.require("type"), join(path, "type"));
  if (type == "sinusoid") {
    Sinusoid s;
    s.amplitude = as_double(obj.require("amplitude"), join(path, "amplitude"));
    s.rate = as_double(obj.require("rate"), join(path, "rate"));
    if (const json* p = obj.find("phase")) s.phase = as_double(*p, join(path, "phase"));
    obj.finish();
    return s;
  }
  if (type == "constant") {
    const ConstantRef c{as_double(obj.require("value"), join(path, "value"))};
    obj.finish();
    return c;
  }
  if (type == "piecewise") {
    const std::string ppath = join(path, "points");
    const json& pts = obj.require("points");
    if (!pts.is_array()) bail(ppath, "expected an array of [t, value] pairs");
    PiecewiseLinear pw;
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
      const json& pair = pts[static_cast<size_t>(k)];
      const std::string kpath = at(ppath, k);
      if (!pair.is_array() || pair.size() != 2) bail(kpath, "expected a [t, value] pair");
      pw.points.emplace_back(as_double(pair[0], at(kpath, 0)),
                             as_double(pair[1], at(kpath, 1)));
    }
    obj.finish();
    return pw;
  }
  bail(join(path, "type"), "unknown reference type '" + type + "'");
}

void parse_vehicle(const json& j, const std::string& path, Scenario& s) {
  Object obj(j, path);
  const std::string kind = as_string(obj.require("kind"), join(path, "kind"));
  const std::string ppath = join(path, "params");
  if (kind == "unicycle") {
    s.kinds.push_back(Unicycle{});
  } else if (kind == "constant_speed") {
    Object params(obj.require("params"), ppath);
    s.kinds.push_back(ConstantSpeed{as_double(params.require("speed"), join(ppath, "speed"))});
    params.finish();
  } else if (kind == "car") {
    Object params(obj.require("params"), ppath);
    s.kinds.push_back(
        CarLike{as_double(params.require("wheelbase"), join(ppath, "wheelbase"))});
    params.finish();
  } else {
    bail(join(path, "kind"), "unknown vehicle kind '" + kind + "'");
  }
  s.initial.push_back(as_vector(obj.require("initial"), join(path, "initial")));
  obj.finish();
}

EdgeConstraint parse_constraint(const json& j, const std::string& path,
                                const std::map<std::string, TimeFunction>& refs) {
  Object obj(j, path);
  const std::string type = as_string(obj.require("type"), join(path, "type"));
  if (type == "speed_track") {
    SpeedTrack st;
    st.i = as_int(obj.require("i"), join(path, "i"));
    const std::string rpath = join(path, "refs");
    const json& names = obj.require("refs");
    if (!names.is_array()) bail(rpath, "expected an array of reference names");
    for (int k = 0; k < static_cast<int>(names.size()); ++k) {
      const std::string name = as_string(names[static_cast<size_t>(k)], at(rpath, k));
      const auto it = refs.find(name);
      if (it == refs.end()) bail(at(rpath, k), "unknown reference '" + name + "'");
      st.refs.push_back(it->second);
    }
    obj.finish();
    return st;
  }

  const int i = as_int(obj.require("i"), join(path, "i"));
  const int jj = as_int(obj.require("j"), join(path, "j"));
  const std::string ppath = join(path, "params");
  Object params(obj.require("params"), ppath);
  const auto num = [&](const char* key) {
    return as_double(params.require(key), join(ppath, key));
  };
  EdgeConstraint out;
  if (type == "distance_eq") {
    out = DistanceEq{i, jj, num("d")};
  } else if (type == "distance_band") {
    out = DistanceBand{i, jj, num("d_minus"), num("d_plus")};
  } else if (type == "heading_eq") {
    out = HeadingEq{i, jj, num("delta")};
  } else if (type == "heading_band") {
    out = HeadingBand{i, jj, num("delta_minus"), num("delta_plus")};
  } else if (type == "visibility") {
    out = Visibility{i, jj, num("cone")};
  } else {
    bail(join(path, "type"), "unknown constraint type '" + type + "'");
  }
  params.finish();
  obj.finish();
  return out;
}

void parse_mode(const json& j, const std::string& path, Scenario& s) {
  Object obj(j, path);
  const std::string type = as_string(obj.require("type"), join(path, "type"));
  if (type == "graph") {
    obj.finish();
    return;
  }
  if (type == "tree") {
    const std::string ppath = join(path, "parent");
    const json& par = obj.require("parent");
    if (!par.is_array()) bail(ppath, "expected an array of parent indices");
    LeaderFollowerTree tree;
    for (int k = 0; k < static_cast<int>(par.size()); ++k) {
      tree.parent.push_back(as_int(par[static_cast<size_t>(k)], at(ppath, k)));
    }
    s.tree = std::move(tree);
    obj.finish();
    return;
  }
  bail(join(path, "type"), "unknown mode '" + type + "'");
}

void parse_sim(const json& j, const std::string& path, Scenario& s) {
  Object obj(j, path);
  if (const json* p = obj.find("duration")) s.duration = as_double(*p, join(path, "duration"));
  if (const json* p = obj.find("step")) s.step = as_double(*p, join(path, "step"));
  if (const json* p = obj.find("integrator")) {
    const std::string name = as_string(*p, join(path, "integrator"));
    if (name == "euler") {
      s.integrator = Integrator::Euler;
    } else if (name == "rk4") {
      s.integrator = Integrator::RK4;
    } else {
      bail(join(path, "integrator"), "unknown integrator '" + name + "'");
    }
  }
  if (const json* p = obj.find("eps_act")) s.eps_act = as_double(*p, join(path, "eps_act"));
  if (const json* p = obj.find("margin")) s.margin = as_double(*p, join(path, "margin"));
  if (const json* p = obj.find("bound")) s.bound = as_double(*p, join(path, "bound"));
  if (const json* p = obj.find("projection")) {
    s.projection = as_bool(*p, join(path, "projection"));
  }
  if (const json* p = obj.find("projection_tol")) {
    s.projection_tol = as_double(*p, join(path, "projection_tol"));
  }
  if (const json* p = obj.find("cruise")) s.cruise = as_vector(*p, join(path, "cruise"));
  if (const json* p = obj.find("seed")) s.seed = as_seed(*p, join(path, "seed"));
  obj.finish();
}

json reference_json(const TimeFunction& f) {
  json out;
  if (const auto* s = std::get_if<Sinusoid>(&f); s != nullptr) {
    out["type"] = "sinusoid";
    out["amplitude"] = s->amplitude;
    out["rate"] = s->rate;
    out["phase"] = s->phase;
    return out;
  }
  if (const auto* c = std::get_if<ConstantRef>(&f); c != nullptr) {
    out["type"] = "constant";
    out["value"] = c->value;
    return out;
  }
  const auto& pw = std::get<PiecewiseLinear>(f);
  out["type"] = "piecewise";
  json pts = json::array();
  for (const auto& [t, v] : pw.points) pts.push_back(json::array({t, v}));
  out["points"] = std::move(pts);
  return out;
}

bool vec_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() && (a.size() == 0 || (a.array() == b.array()).all());
}

bool kind_equal(const VehicleKind& a, const VehicleKind& b) {
  if (a.index() != b.index()) return false;
  if (const auto* cs = std::get_if<ConstantSpeed>(&a); cs != nullptr) {
    return cs->speed == std::get<ConstantSpeed>(b).speed;
  }
  if (const auto* car = std::get_if<CarLike>(&a); car != nullptr) {
    return car->wheelbase == std::get<CarLike>(b).wheelbase;
  }
  return true;
}

bool ref_equal(const TimeFunction& a, const TimeFunction& b) {
  if (a.index() != b.index()) return false;
  if (const auto* s = std::get_if<Sinusoid>(&a); s != nullptr) {
    const auto& o = std::get<Sinusoid>(b);
    return s->amplitude == o.amplitude && s->rate == o.rate && s->phase == o.phase;
  }
  if (const auto* c = std::get_if<ConstantRef>(&a); c != nullptr) {
    return c->value == std::get<ConstantRef>(b).value;
  }
  return std::get<PiecewiseLinear>(a).points == std::get<PiecewiseLinear>(b).points;
}

bool constraint_equal(const EdgeConstraint& a, const EdgeConstraint& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<DistanceEq>(&a); x != nullptr) {
    const auto& y = std::get<DistanceEq>(b);
    return x->i == y.i && x->j == y.j && x->d == y.d;
  }
  if (const auto* x = std::get_if<DistanceBand>(&a); x != nullptr) {
    const auto& y = std::get<DistanceBand>(b);
    return x->i == y.i && x->j == y.j && x->d_minus == y.d_minus && x->d_plus == y.d_plus;
  }
  if (const auto* x = std::get_if<HeadingEq>(&a); x != nullptr) {
    const auto& y = std::get<HeadingEq>(b);
    return x->i == y.i && x->j == y.j && x->delta == y.delta;
  }
  if (const auto* x = std::get_if<HeadingBand>(&a); x != nullptr) {
    const auto& y = std::get<HeadingBand>(b);
    return x->i == y.i && x->j == y.j && x->delta_minus == y.delta_minus &&
           x->delta_plus == y.delta_plus;
  }
  if (const auto* x = std::get_if<Visibility>(&a); x != nullptr) {
    const auto& y = std::get<Visibility>(b);
    return x->i == y.i && x->j == y.j && x->cone == y.cone;
  }
  const auto& x = std::get<SpeedTrack>(a);
  const auto& y = std::get<SpeedTrack>(b);
  if (x.i != y.i || x.refs.size() != y.refs.size()) return false;
  for (size_t k = 0; k < x.refs.size(); ++k) {
    if (!ref_equal(x.refs[k], y.refs[k])) return false;
  }
  return true;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_string(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

ScenarioFile parse_scenario_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), origin);
  }
  if (!doc.is_object()) throw ParseError("expected a top-level object", origin);

  ScenarioFile out;
  out.digest = digest_string(text);
  Object root(doc, "");

  const json& vehicles = root.require("vehicles");
  if (!vehicles.is_array() || vehicles.empty()) {
    bail("vehicles", "expected a nonempty array");
  }

  std::map<std::string, TimeFunction> refs;
  if (const json* r = root.find("references")) {
    if (!r->is_object()) bail("references", "expected an object");
    for (const auto& item : r->items()) {
      refs.emplace(item.key(), parse_reference(item.value(), join("references", item.key())));
    }
  }

  for (int k = 0; k < static_cast<int>(vehicles.size()); ++k) {
    parse_vehicle(vehicles[static_cast<size_t>(k)], at("vehicles", k), out.scenario);
  }
  if (const json* c = root.find("constraints")) {
    if (!c->is_array()) bail("constraints", "expected an array");
    for (int k = 0; k < static_cast<int>(c->size()); ++k) {
      out.scenario.constraints.push_back(
          parse_constraint((*c)[static_cast<size_t>(k)], at("constraints", k), refs));
    }
  }
  if (const json* m = root.find("mode")) parse_mode(*m, "mode", out.scenario);
  if (const json* sj = root.find("sim")) parse_sim(*sj, "sim", out.scenario);
  if (const json* o = root.find("outputs")) {
    Object outputs(*o, "outputs");
    if (const json* p = outputs.find("csv")) out.csv_path = as_string(*p, "outputs.csv");
    if (const json* p = outputs.find("report")) {
      out.report_path = as_string(*p, "outputs.report");
    }
    outputs.finish();
  }
  root.finish();
  return out;
}

ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path);
}

std::string serialize_scenario(const Scenario& s, const std::string& csv_path,
                               const std::string& report_path) {
  json doc;

  json vehicles = json::array();
  for (size_t v = 0; v < s.kinds.size(); ++v) {
    json jv;
    if (std::holds_alternative<Unicycle>(s.kinds[v])) {
      jv["kind"] = "unicycle";
    } else if (const auto* cs = std::get_if<ConstantSpeed>(&s.kinds[v]); cs != nullptr) {
      jv["kind"] = "constant_speed";
      jv["params"]["speed"] = cs->speed;
    } else {
      jv["kind"] = "car";
      jv["params"]["wheelbase"] = std::get<CarLike>(s.kinds[v]).wheelbase;
    }
    json init = json::array();
    if (v < s.initial.size()) {
      for (int k = 0; k < s.initial[v].size(); ++k) init.push_back(s.initial[v](k));
    }
    jv["initial"] = std::move(init);
    vehicles.push_back(std::move(jv));
  }
  doc["vehicles"] = std::move(vehicles);

  json refs = json::object();
  int counter = 0;
  json cons = json::array();
  for (const EdgeConstraint& c : s.constraints) {
    json jc;
    if (const auto* st = std::get_if<SpeedTrack>(&c); st != nullptr) {
      jc["type"] = "speed_track";
      jc["i"] = st->i;
      json names = json::array();
      for (const TimeFunction& f : st->refs) {
        const std::string name = "r" + std::to_string(counter++);
        refs[name] = reference_json(f);
        names.push_back(name);
      }
      jc["refs"] = std::move(names);
    } else {
      const auto [i, j] = edge_of(c);
      jc["i"] = i;
      jc["j"] = j;
      if (const auto* x = std::get_if<DistanceEq>(&c); x != nullptr) {
        jc["type"] = "distance_eq";
        jc["params"]["d"] = x->d;
      } else if (const auto* x2 = std::get_if<DistanceBand>(&c); x2 != nullptr) {
        jc["type"] = "distance_band";
        jc["params"]["d_minus"] = x2->d_minus;
        jc["params"]["d_plus"] = x2->d_plus;
      } else if (const auto* x3 = std::get_if<HeadingEq>(&c); x3 != nullptr) {
        jc["type"] = "heading_eq";
        jc["params"]["delta"] = x3->delta;
      } else if (const auto* x4 = std::get_if<HeadingBand>(&c); x4 != nullptr) {
        jc["type"] = "heading_band";
        jc["params"]["delta_minus"] = x4->delta_minus;
        jc["params"]["delta_plus"] = x4->delta_plus;
      } else {
        jc["type"] = "visibility";
        jc["params"]["cone"] = std::get<Visibility>(c).cone;
      }
    }
    cons.push_back(std::move(jc));
  }
  if (!cons.empty()) doc["constraints"] = std::move(cons);
  if (!refs.empty()) doc["references"] = std::move(refs);

  if (s.tree) {
    doc["mode"]["type"] = "tree";
    doc["mode"]["parent"] = s.tree->parent;
  } else {
    doc["mode"]["type"] = "graph";
  }

  json sim;
  sim["duration"] = s.duration;
  sim["step"] = s.step;
  sim["integrator"] = integrator_name(s.integrator);
  sim["eps_act"] = s.eps_act;
  sim["margin"] = s.margin;
  sim["bound"] = s.bound;
  sim["projection"] = s.projection;
  sim["projection_tol"] = s.projection_tol;
  if (s.cruise.size() > 0) {
    json cruise = json::array();
    for (int k = 0; k < s.cruise.size(); ++k) cruise.push_back(s.cruise(k));
    sim["cruise"] = std::move(cruise);
  }
  sim["seed"] = s.seed;
  doc["sim"] = std::move(sim);

  if (!csv_path.empty() || !report_path.empty()) {
    json outputs;
    if (!csv_path.empty()) outputs["csv"] = csv_path;
    if (!report_path.empty()) outputs["report"] = report_path;
    doc["outputs"] = std::move(outputs);
  }
  return doc.dump(2) + "\n";
}

bool scenario_equal(const Scenario& a, const Scenario& b) {
  if (a.kinds.size() != b.kinds.size() || a.initial.size() != b.initial.size() ||
      a.constraints.size() != b.constraints.size()) {
    return false;
  }
  for (size_t k = 0; k < a.kinds.size(); ++k) {
    if (!kind_equal(a.kinds[k], b.kinds[k])) return false;
  }
  for (size_t k = 0; k < a.initial.size(); ++k) {
    if (!vec_equal(a.initial[k], b.initial[k])) return false;
  }
  for (size_t k = 0; k < a.constraints.size(); ++k) {
    if (!constraint_equal(a.constraints[k], b.constraints[k])) return false;
  }
  if (a.tree.has_value() != b.tree.has_value()) return false;
  if (a.tree && a.tree->parent != b.tree->parent) return false;
  return a.duration == b.duration && a.step == b.step && a.integrator == b.integrator &&
         a.eps_act == b.eps_act && a.margin == b.margin && a.bound == b.bound &&
         vec_equal(a.cruise, b.cruise) && a.projection == b.projection &&
         a.projection_tol == b.projection_tol && a.seed == b.seed;
}

}  // namespace coordfeas
