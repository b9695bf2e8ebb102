#include "shatterlab/campaign.hpp"

#include <cmath>
#include <set>

#include "shatterlab/errors.hpp"
#include "shatterlab/io.hpp"
#include "shatterlab/version.hpp"

namespace shatterlab::campaign {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string escape_key(const std::string& k) {
  std::string out;
  for (char c : k) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
  throw ParseError(what, pointer.empty() ? "/" : pointer);
}

// Object view that remembers which keys were read so that the rest can be
// reported as unknown.
class Obj {
 public:
  Obj(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
    if (!j_.is_object()) fail(ptr_, "expected an object");
  }

  const json* opt(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& req(const std::string& key) {
    const auto* p = opt(key);
    if (!p) fail(at(key), "missing required field '" + key + "'");
    return *p;
  }
  std::string at(const std::string& key) const { return ptr_ + "/" + escape_key(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) fail(at(k), "unknown key '" + k + "'");
  }

 private:
  const json& j_;
  std::string ptr_;
  std::set<std::string> used_;
};

double as_double(const json& v, const std::string& ptr) {
  if (!v.is_number()) fail(ptr, "expected a number");
  return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& ptr) {
  if (!v.is_number_integer()) fail(ptr, "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t as_seed(const json& v, const std::string& ptr) {
  if (!v.is_number_unsigned()) fail(ptr, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& ptr) {
  if (!v.is_string()) fail(ptr, "expected a string");
  return v.get<std::string>();
}

const json& as_array(const json& v, const std::string& ptr) {
  if (!v.is_array()) fail(ptr, "expected an array");
  return v;
}

std::vector<double> double_list(const json& v, const std::string& ptr) {
  std::vector<double> out;
  std::size_t i = 0;
  for (const auto& e : as_array(v, ptr)) out.push_back(as_double(e, ptr + "/" + std::to_string(i++)));
  return out;
}

std::vector<double> eps_grid(const json& v, const std::string& ptr) {
  if (v.is_array()) return double_list(v, ptr);
  if (!v.is_object()) fail(ptr, "expected an array or {start, stop, points}");
  Obj o(v, ptr);
  const double start = as_double(o.req("start"), o.at("start"));
  const double stop = as_double(o.req("stop"), o.at("stop"));
  const auto points = as_int(o.req("points"), o.at("points"));
  o.finish();
  return geometric_grid(start, stop, points);
}

MatrixFamily family(const json& v, const std::string& ptr, std::uint64_t default_seed, bool n_required) {
  Obj o(v, ptr);
  MatrixFamily f;
  const auto kind = as_string(o.req("kind"), o.at("kind"));
  const auto k = family_from_name(kind);
  if (!k) fail(o.at("kind"), "unknown family '" + kind + "'");
  f.kind = *k;
  if (n_required && f.kind != FamilyKind::FromFile) f.n = as_int(o.req("n"), o.at("n"));
  else if (const auto* p = o.opt("n")) f.n = as_int(*p, o.at("n"));
  if (const auto* p = o.opt("norm_target")) f.norm_target = as_double(*p, o.at("norm_target"));
  else if (f.kind == FamilyKind::FromFile) f.norm_target = 0.0;
  if (const auto* p = o.opt("path")) f.path = as_string(*p, o.at("path"));
  f.seed = default_seed;
  if (const auto* p = o.opt("seed")) f.seed = as_seed(*p, o.at("seed"));
  o.finish();
  return f;
}

RhoLaw rho_law(const json& v, const std::string& ptr) {
  Obj o(v, ptr);
  const auto law = as_string(o.req("law"), o.at("law"));
  RhoLaw r;
  if (law == "const") {
    r.kind = RhoLaw::Kind::Constant;
    r.value = as_double(o.req("value"), o.at("value"));
  } else if (law == "power") {
    r.kind = RhoLaw::Kind::Power;
    r.value = as_double(o.req("alpha"), o.at("alpha"));
  } else if (law == "log2") {
    r.kind = RhoLaw::Kind::LogSquared;
    r.value = 1.0;
    if (const auto* p = o.opt("c")) r.value = as_double(*p, o.at("c"));
  } else {
    fail(o.at("law"), "unknown rho law '" + law + "' (const, power, log2)");
  }
  o.finish();
  return r;
}

std::string csv_header(const char* schema, const char* columns) {
  return std::string("# schema=") + schema + "\n" + columns + "\n";
}

std::string F(double x) { return io::format_double(x); }
std::string F(std::int64_t x) { return std::to_string(x); }

json fit_json(const std::optional<LogSlopeFit>& f) {
  if (!f) return nullptr;
  ojson j;
  j["slope"] = json_number(f->slope);
  j["std_error"] = json_number(f->std_error);
  j["intercept"] = json_number(f->intercept);
  j["points_used"] = f->points_used;
  return j;
}

json quantile_json(const Quantiles& q) {
  ojson j;
  j["q10"] = json_number(q.q10);
  j["q50"] = json_number(q.q50);
  j["q90"] = json_number(q.q90);
  return j;
}

ojson summary_head(const Campaign& c, const char* schema) {
  ojson j;
  j["schema"] = schema;
  j["campaign"] = c.kind;
  j["name"] = c.name;
  j["config"] = c.document;
  return j;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

std::vector<OutputFile> render(const Campaign& c, const TailCampaignConfig& cfg) {
  const auto r = run_tail_campaign(cfg);
  std::string cdf = csv_header("shatterlab.tail-cdf/1", "eps,count,fraction");
  for (const auto& p : r.empirical_cdf) cdf += F(p.eps) + "," + F(p.count) + "," + F(p.fraction) + "\n";
  std::string trials = csv_header("shatterlab.tail-trials/1", "trial,sigma");
  for (std::size_t t = 0; t < r.samples.size(); ++t)
    trials += F(static_cast<std::int64_t>(t)) + "," + F(r.samples[t]) + "\n";

  auto s = summary_head(c, "shatterlab.tail-summary/1");
  ojson res;
  res["trials_used"] = r.trials_used;
  res["fitted_slope"] = r.fitted_slope ? json_number(*r.fitted_slope) : json(nullptr);
  res["slope_stderr"] = r.slope_stderr ? json_number(*r.slope_stderr) : json(nullptr);
  res["fit_points"] = r.fit_points;
  res["fit_window"] = {json_number(5.0 / static_cast<double>(cfg.trials)), 0.5};
  if (!r.fit_note.empty()) res["fit_note"] = r.fit_note;
  s["result"] = res;
  s["files"] = {c.name + "_cdf.csv", c.name + "_trials.csv"};
  s["environment"] = environment_stamp();
  return {{c.name + "_cdf.csv", cdf}, {c.name + "_trials.csv", trials}, {c.name + "_summary.json", dump(s)}};
}

std::vector<OutputFile> render(const Campaign& c, const ShatterCampaignConfig& cfg) {
  const auto r = run_shatter_campaign(cfg);
  std::string rows = csv_header("shatterlab.shatter-trials/1",
                                "law,n,rho,trial,kappa_v_lower,kappa_v_upper,kappa_v_direct,eta,sigma_n,nnz,"
                                "untouched_rows,defective");
  ojson cells = ojson::array();
  for (const auto& cell : r.cells) {
    for (const auto& t : cell.records)
      rows += cell.law + "," + F(cell.n) + "," + F(cell.rho) + "," + F(t.trial) + "," + F(t.kappa_v_lower) + "," +
              F(t.kappa_v_upper) + "," + F(t.kappa_v_direct) + "," + F(t.eta) + "," + F(t.sigma_n) + "," +
              F(t.nnz) + "," + F(t.untouched_rows) + "," + (t.defective ? "1" : "0") + "\n";
    ojson j;
    j["law"] = cell.law;
    j["n"] = cell.n;
    j["rho"] = json_number(cell.rho);
    j["k_param"] = json_number(cell.k_param);
    j["m_norm"] = json_number(cell.m_norm);
    j["log_kappa_upper"] = quantile_json(cell.log_kappa_upper);
    j["log_inv_eta"] = quantile_json(cell.log_inv_eta);
    j["reference_log_kappa"] = json_number(cell.reference_log_kappa);
    j["reference_log_inv_eta"] = json_number(cell.reference_log_inv_eta);
    j["trials"] = static_cast<std::int64_t>(cell.records.size());
    j["trials_with_untouched_rows"] = cell.trials_with_untouched_rows;
    j["sandwich_violations"] = cell.sandwich_violations;
    cells.push_back(j);
  }
  ojson growth = ojson::array();
  for (const auto& g : r.growth) {
    ojson j;
    j["law"] = g.law;
    j["median_log_kappa_upper_vs_n"] = fit_json(g.vs_n);
    j["median_log_kappa_upper_vs_log_n"] = fit_json(g.vs_log_n);
    growth.push_back(j);
  }
  auto s = summary_head(c, "shatterlab.shatter-summary/1");
  s["cells"] = cells;
  s["growth"] = growth;
  s["files"] = {c.name + "_trials.csv"};
  s["environment"] = environment_stamp();
  return {{c.name + "_trials.csv", rows}, {c.name + "_summary.json", dump(s)}};
}

std::vector<OutputFile> render(const Campaign& c, const AreaCampaignConfig& cfg) {
  const auto r = run_area_campaign(cfg);
  std::string rows = csv_header("shatterlab.area/1", "eps,mean_area,std_error,mean_error_bound");
  for (const auto& p : r.points)
    rows += F(p.eps) + "," + F(p.mean_area) + "," + F(p.std_error) + "," + F(p.mean_error_bound) + "\n";
  auto s = summary_head(c, "shatterlab.area-summary/1");
  s["fit"] = fit_json(r.fit);
  s["evaluations"] = r.evaluations;
  s["files"] = {c.name + "_area.csv"};
  s["environment"] = environment_stamp();
  return {{c.name + "_area.csv", rows}, {c.name + "_summary.json", dump(s)}};
}

std::vector<OutputFile> render(const Campaign& c, const CouponConfig& cfg) {
  const auto pts = coupon_collector_probe(cfg);
  std::string rows = csv_header("shatterlab.coupon/1", "c,rho,hits,fraction");
  for (const auto& p : pts) rows += F(p.c) + "," + F(p.rho) + "," + F(p.hits) + "," + F(p.fraction) + "\n";
  auto s = summary_head(c, "shatterlab.coupon-summary/1");
  s["trials"] = cfg.trials;
  s["files"] = {c.name + "_coupon.csv"};
  s["environment"] = environment_stamp();
  return {{c.name + "_coupon.csv", rows}, {c.name + "_summary.json", dump(s)}};
}

}  // namespace

json json_number(double x) {
  if (std::isfinite(x)) return x;
  return io::format_double(x);
}

json environment_stamp() {
  ojson j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["prng"] = kPrngContract;
  return j;
}

Campaign parse_campaign(const json& doc) {
  Obj top(doc, "");
  const auto schema = as_string(top.req("schema"), "/schema");
  if (schema != kConfigSchema) fail("/schema", "unsupported schema '" + schema + "', expected " + kConfigSchema);
  Campaign c;
  c.document = doc;
  c.kind = as_string(top.req("campaign"), "/campaign");
  c.name = c.kind;
  if (const auto* p = top.opt("name")) c.name = as_string(*p, "/name");
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos)
    fail("/name", "name must be a nonempty file prefix without path separators");

  const auto seed = as_seed(top.req("seed"), "/seed");
  const auto trials = as_int(top.req("trials"), "/trials");

  if (c.kind == "tail") {
    TailCampaignConfig cfg;
    cfg.seed = seed;
    cfg.trials = trials;
    cfg.family = family(top.req("family"), "/family", seed, true);
    cfg.rho = as_double(top.req("rho"), "/rho");
    if (const auto* p = top.opt("scale")) cfg.scale = as_double(*p, "/scale");
    if (const auto* p = top.opt("m")) cfg.m = as_int(*p, "/m");
    if (const auto* p = top.opt("shift")) {
      const auto v = double_list(*p, "/shift");
      if (v.size() != 2) fail("/shift", "expected [re, im]");
      cfg.shift = {v[0], v[1]};
    }
    cfg.eps_grid = eps_grid(top.req("eps_grid"), "/eps_grid");
    c.config = cfg;
  } else if (c.kind == "shatter") {
    ShatterCampaignConfig cfg;
    cfg.seed = seed;
    cfg.trials = trials;
    cfg.family = family(top.req("family"), "/family", seed, false);
    if (const auto* p = top.opt("scale")) cfg.scale = as_double(*p, "/scale");
    std::size_t i = 0;
    for (const auto& law : as_array(top.req("rho_laws"), "/rho_laws"))
      cfg.rho_laws.push_back(rho_law(law, "/rho_laws/" + std::to_string(i++)));
    i = 0;
    for (const auto& n : as_array(top.req("n_list"), "/n_list"))
      cfg.n_list.push_back(as_int(n, "/n_list/" + std::to_string(i++)));
    c.config = cfg;
  } else if (c.kind == "area") {
    AreaCampaignConfig cfg;
    cfg.seed = seed;
    cfg.trials = trials;
    cfg.family = family(top.req("family"), "/family", seed, true);
    cfg.rho = as_double(top.req("rho"), "/rho");
    if (const auto* p = top.opt("scale")) cfg.scale = as_double(*p, "/scale");
    cfg.eps_grid = eps_grid(top.req("eps_grid"), "/eps_grid");
    if (const auto* p = top.opt("grid_resolution")) cfg.grid_resolution = as_int(*p, "/grid_resolution");
    if (const auto* p = top.opt("cells_per_eps")) cfg.cells_per_eps = as_double(*p, "/cells_per_eps");
    c.config = cfg;
  } else if (c.kind == "coupon") {
    CouponConfig cfg;
    cfg.seed = seed;
    cfg.trials = trials;
    cfg.n = as_int(top.req("n"), "/n");
    cfg.c_list = double_list(top.req("c_list"), "/c_list");
    c.config = cfg;
  } else {
    fail("/campaign", "unknown campaign '" + c.kind + "' (tail, shatter, area, coupon)");
  }
  top.finish();
  return c;
}

Campaign parse_campaign_text(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), source + ":byte " + std::to_string(e.byte));
  }
  return parse_campaign(doc);
}

void validate(const Campaign& c) {
  std::visit([](const auto& cfg) { cfg.validate(); }, c.config);
}

Plan plan(const Campaign& c) {
  return std::visit(
      [](const auto& cfg) -> Plan {
        using T = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<T, ShatterCampaignConfig>) {
          Plan p{0, 0};
          for (auto n : cfg.n_list) {
            p.trials += cfg.trials * static_cast<std::int64_t>(cfg.rho_laws.size());
            p.matvecs += 2 * n * cfg.trials * static_cast<std::int64_t>(cfg.rho_laws.size());
          }
          return p;
        } else if constexpr (std::is_same_v<T, CouponConfig>) {
          return {cfg.trials * static_cast<std::int64_t>(cfg.c_list.size()), 0};
        } else if constexpr (std::is_same_v<T, AreaCampaignConfig>) {
          return {cfg.trials, cfg.trials * cfg.family.n * (1 + static_cast<std::int64_t>(cfg.eps_grid.size()))};
        } else {
          return {cfg.trials, cfg.trials * cfg.family.n};
        }
      },
      c.config);
}

std::vector<OutputFile> run(const Campaign& c) {
  validate(c);
  return std::visit([&](const auto& cfg) { return render(c, cfg); }, c.config);
}

}  // namespace shatterlab::campaign
