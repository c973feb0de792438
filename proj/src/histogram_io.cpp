#include "twinbeam/histogram_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "twinbeam/errors.hpp"

namespace twinbeam {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw FileNotFound("no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& text, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& why) {
  std::ostringstream os;
  os << source << ":" << line << ": " << why;
  throw ParseError(os.str());
}

template <class T>
T parse_unsigned(std::string_view field, const std::string& source, std::size_t line,
                 const char* what) {
  field = trim(field);
  if (!field.empty() && field.front() == '-')
    parse_fail(source, line, std::string("negative ") + what + " '" + std::string(field) + "'");
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    parse_fail(source, line, std::string("invalid ") + what + " '" + std::string(field) + "'");
  return value;
}

PhotocountHistogram parse_joint(const std::string& text, const std::string& source,
                                std::string_view header) {
  std::string_view rest(text);
  if (rest.substr(0, 3) == "\xEF\xBB\xBF") rest.remove_prefix(3);

  PhotocountHistogram hist;
  hist.label = source;
  bool seen_header = false;
  std::size_t line_no = 0;
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header)
        parse_fail(source, line_no,
                   "expected header '" + std::string(header) + "', got '" + std::string(line) + "'");
      seen_header = true;
      continue;
    }
    std::array<std::string_view, 3> fields;
    std::size_t n = 0;
    std::string_view cur = line;
    while (true) {
      const std::size_t comma = cur.find(',');
      if (n == fields.size()) parse_fail(source, line_no, "expected 3 fields");
      fields[n++] = cur.substr(0, comma);
      if (comma == std::string_view::npos) break;
      cur = cur.substr(comma + 1);
    }
    if (n != 3) parse_fail(source, line_no, "expected 3 fields");
    const auto cs = parse_unsigned<std::uint32_t>(fields[0], source, line_no, "coordinate");
    const auto ci = parse_unsigned<std::uint32_t>(fields[1], source, line_no, "coordinate");
    const auto count = parse_unsigned<std::uint64_t>(fields[2], source, line_no, "count");
    if (count == 0) parse_fail(source, line_no, "zero count (rows list nonzero cells only)");
    if (hist.count(cs, ci) != 0) {
      std::ostringstream os;
      os << source << ":" << line_no << ": duplicate entry (" << cs << ", " << ci << ")";
      throw DuplicateEntry(os.str());
    }
    hist.add(cs, ci, count);
  }
  if (!seen_header) throw EmptyHistogram(source + ": missing header and data");
  if (hist.empty()) throw EmptyHistogram(source + ": no data rows");
  return hist;
}

std::string format_joint(const PhotocountHistogram& hist, const char* header) {
  std::ostringstream os;
  os << header << '\n';
  for (const auto& [key, count] : hist.entries())
    os << key.first << ',' << key.second << ',' << count << '\n';
  return os.str();
}

json moments_to_json(const MomentSet& m) {
  return {{"mean_s", m.mean_s}, {"mean_i", m.mean_i}, {"second_s", m.second_s},
          {"second_i", m.second_i}, {"cross", m.cross}};
}

MomentSet moments_from_json(const json& j) {
  return {j.at("mean_s").get<double>(), j.at("mean_i").get<double>(),
          j.at("second_s").get<double>(), j.at("second_i").get<double>(),
          j.at("cross").get<double>()};
}

void component_to_json(json& field, const FieldComponent& c, const std::string& suffix) {
  field["kind_" + suffix] = to_string(c.kind());
  field["b_" + suffix] = c.mean_per_mode();
  if (c.kind() == FieldComponent::Kind::poisson)
    field["M_" + suffix] = nullptr;
  else
    field["M_" + suffix] = c.modes();
  field["mean_" + suffix] = c.mean();
}

FieldComponent component_from_json(const json& field, const std::string& suffix) {
  const std::string kind = field.value("kind_" + suffix, std::string("thermal"));
  if (kind == "vacuum") return FieldComponent::vacuum();
  if (kind == "poisson") return FieldComponent::poisson(field.at("mean_" + suffix).get<double>());
  if (kind != "thermal") throw ParseError("unknown component kind '" + kind + "'");
  const double b = field.at("b_" + suffix).get<double>();
  if (b == 0.0) return FieldComponent::vacuum();
  return FieldComponent::thermal(field.at("M_" + suffix).get<double>(), b);
}

json detector_to_json(const DetectorParams& d) {
  return {{"pixels", d.pixels}, {"efficiency", d.efficiency}, {"dark_rate", d.dark_rate}};
}

DetectorParams detector_from_json(const json& j) {
  DetectorParams d;
  d.pixels = j.at("pixels").get<std::uint32_t>();
  d.efficiency = j.at("efficiency").get<double>();
  d.dark_rate = j.value("dark_rate", 0.0);
  d.validate();
  return d;
}

}  // namespace

PhotocountHistogram parse_histogram(const std::string& text, const std::string& source) {
  return parse_joint(text, source, "cs,ci,count");
}

DarkCountRecord parse_dark_record(const std::string& text, const std::string& source) {
  return parse_joint(text, source, "ds,di,count");
}

PhotocountHistogram load_histogram(const fs::path& path) {
  return parse_histogram(read_file(path), path.string());
}

DarkCountRecord load_dark_record(const fs::path& path) {
  return parse_dark_record(read_file(path), path.string());
}

std::map<std::uint32_t, std::uint64_t> load_arm_counts(const fs::path& path) {
  const std::string text = read_file(path);
  // Reuse the joint parser by mapping `d,count` rows onto `d,0,count`.
  std::istringstream in(text);
  std::ostringstream joint;
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    if (header) {
      if (t != "d,count" && t != "\xEF\xBB\xBF" "d,count")
        parse_fail(path.string(), line_no, "expected header 'd,count'");
      joint << "ds,di,count\n";
      header = false;
      continue;
    }
    const std::size_t comma = t.find(',');
    if (comma == std::string_view::npos) parse_fail(path.string(), line_no, "expected 2 fields");
    joint << t.substr(0, comma) << ",0," << t.substr(comma + 1) << '\n';
  }
  const DarkCountRecord rec = parse_dark_record(joint.str(), path.string());
  std::map<std::uint32_t, std::uint64_t> out;
  for (const auto& [key, count] : rec.entries()) out[key.first] = count;
  return out;
}

void write_histogram(const PhotocountHistogram& hist, const fs::path& path) {
  write_file(format_joint(hist, "cs,ci,count"), path);
}

void write_dark_record(const DarkCountRecord& dark, const fs::path& path) {
  write_file(format_joint(dark, "ds,di,count"), path);
}

std::string file_sha256(const fs::path& path) {
  const std::string bytes = read_file(path);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 computation failed for " + path.string());
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  return os.str();
}

json model_to_json(const TwinBeamModel& model) {
  json field = json::object();
  component_to_json(field, model.pair, "p");
  component_to_json(field, model.noise_s, "s");
  component_to_json(field, model.noise_i, "i");
  return field;
}

TwinBeamModel model_from_json(const json& j) {
  return {component_from_json(j, "p"), component_from_json(j, "s"), component_from_json(j, "i")};
}

json report_to_json(const Report& report) {
  const CalibrationResult& r = report.result;
  json j;
  j["eta_s"] = r.point.eta_s;
  j["eta_i"] = r.point.eta_i;
  j["mean_pairs"] = r.point.mean_pairs;
  j["field"] = model_to_json(r.model);
  j["declination"] = r.declination;
  if (r.bootstrap) {
    const BootstrapSummary& b = *r.bootstrap;
    j["stderr"] = {{"eta_s", b.stderr_values.eta_s},
                   {"eta_i", b.stderr_values.eta_i},
                   {"mean_pairs", b.stderr_values.mean_pairs},
                   {"method", "bootstrap"},
                   {"replicas", b.replicas},
                   {"failures", b.failures},
                   {"seed", b.seed},
                   {"degenerate", b.degenerate}};
  } else {
    j["stderr"] = nullptr;
  }
  const KlyshkoEstimate& k = r.baseline;
  j["baseline"] = {{"eta_s_klyshko", k.eta_s_cov},
                   {"eta_i_klyshko", k.eta_i_cov},
                   {"eta_s_klyshko_stderr", k.eta_s_cov_stderr},
                   {"eta_i_klyshko_stderr", k.eta_i_cov_stderr},
                   {"eta_s_raw", k.eta_s_raw},
                   {"eta_i_raw", k.eta_i_raw},
                   {"eta_s_raw_stderr", k.eta_s_raw_stderr},
                   {"eta_i_raw_stderr", k.eta_i_raw_stderr}};
  j["status"] = to_string(r.status);
  j["inputs"] = {{"histogram_sha256", report.histogram_sha256},
                 {"dark_sha256", report.dark_sha256}};
  j["config"] = report.config;
  const PhotoelectronMoments& m = r.moments;
  j["moments"] = {{"value", moments_to_json(m.value)},
                  {"stderr", moments_to_json(m.std_error)},
                  {"var_s", m.var_s},
                  {"var_i", m.var_i},
                  {"cov", m.cov},
                  {"var_s_stderr", m.var_s_stderr},
                  {"var_i_stderr", m.var_i_stderr},
                  {"cov_stderr", m.cov_stderr}};
  j["detectors"] = {{"pixels_s", r.detectors.pixels_s},
                    {"pixels_i", r.detectors.pixels_i},
                    {"dark_rate_s", r.detectors.dark_rate_s},
                    {"dark_rate_i", r.detectors.dark_rate_i}};
  const FitDiagnostics& d = r.diagnostics;
  j["diagnostics"] = {{"evaluations", d.evaluations},
                      {"grid_cells", d.grid_cells},
                      {"infeasible_cells", d.infeasible_cells},
                      {"grid_step", d.grid_step},
                      {"simplex_iterations", d.simplex_iterations},
                      {"c_max_s", d.c_max_s},
                      {"c_max_i", d.c_max_i},
                      {"field_truncated_mass", d.field_truncated_mass},
                      {"counts_truncated_mass", d.counts_truncated_mass}};
  if (report.idler_path_transmission) {
    j["idler_path_transmission"] = *report.idler_path_transmission;
    j["eta_i_path_corrected"] = r.point.eta_i / *report.idler_path_transmission;
  }
  return j;
}

Report report_from_json(const json& j) {
  try {
    Report report;
    CalibrationResult& r = report.result;
    r.point = {j.at("eta_s").get<double>(), j.at("eta_i").get<double>(),
               j.at("mean_pairs").get<double>()};
    r.model = model_from_json(j.at("field"));
    r.declination = j.at("declination").get<double>();
    if (j.contains("stderr") && !j.at("stderr").is_null()) {
      const json& s = j.at("stderr");
      BootstrapSummary b;
      b.stderr_values = {s.at("eta_s").get<double>(), s.at("eta_i").get<double>(),
                         s.at("mean_pairs").get<double>()};
      b.replicas = s.value("replicas", 0u);
      b.failures = s.value("failures", 0u);
      b.seed = s.value("seed", std::uint64_t{0});
      b.degenerate = s.value("degenerate", false);
      r.bootstrap = b;
    }
    const json& k = j.at("baseline");
    r.baseline.eta_s_cov = k.at("eta_s_klyshko").get<double>();
    r.baseline.eta_i_cov = k.at("eta_i_klyshko").get<double>();
    r.baseline.eta_s_cov_stderr = k.value("eta_s_klyshko_stderr", 0.0);
    r.baseline.eta_i_cov_stderr = k.value("eta_i_klyshko_stderr", 0.0);
    r.baseline.eta_s_raw = k.value("eta_s_raw", 0.0);
    r.baseline.eta_i_raw = k.value("eta_i_raw", 0.0);
    r.baseline.eta_s_raw_stderr = k.value("eta_s_raw_stderr", 0.0);
    r.baseline.eta_i_raw_stderr = k.value("eta_i_raw_stderr", 0.0);
    r.status = fit_status_from_string(j.at("status").get<std::string>());
    report.histogram_sha256 = j.at("inputs").at("histogram_sha256").get<std::string>();
    report.dark_sha256 = j.at("inputs").at("dark_sha256").get<std::string>();
    report.config = j.value("config", json::object());
    if (j.contains("moments")) {
      const json& m = j.at("moments");
      r.moments.value = moments_from_json(m.at("value"));
      r.moments.std_error = moments_from_json(m.at("stderr"));
      r.moments.var_s = m.at("var_s").get<double>();
      r.moments.var_i = m.at("var_i").get<double>();
      r.moments.cov = m.at("cov").get<double>();
      r.moments.var_s_stderr = m.at("var_s_stderr").get<double>();
      r.moments.var_i_stderr = m.at("var_i_stderr").get<double>();
      r.moments.cov_stderr = m.at("cov_stderr").get<double>();
    }
    if (j.contains("detectors")) {
      const json& d = j.at("detectors");
      r.detectors = {d.at("pixels_s").get<std::uint32_t>(), d.at("pixels_i").get<std::uint32_t>(),
                     d.at("dark_rate_s").get<double>(), d.at("dark_rate_i").get<double>()};
    }
    if (j.contains("diagnostics")) {
      const json& d = j.at("diagnostics");
      FitDiagnostics& g = r.diagnostics;
      g.evaluations = d.at("evaluations").get<std::uint64_t>();
      g.grid_cells = d.at("grid_cells").get<std::uint32_t>();
      g.infeasible_cells = d.at("infeasible_cells").get<std::uint32_t>();
      g.grid_step = d.at("grid_step").get<double>();
      g.simplex_iterations = d.at("simplex_iterations").get<int>();
      g.c_max_s = d.at("c_max_s").get<std::uint32_t>();
      g.c_max_i = d.at("c_max_i").get<std::uint32_t>();
      g.field_truncated_mass = d.at("field_truncated_mass").get<double>();
      g.counts_truncated_mass = d.at("counts_truncated_mass").get<double>();
    }
    if (j.contains("idler_path_transmission"))
      report.idler_path_transmission = j.at("idler_path_transmission").get<double>();
    return report;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

void write_joint_distribution_csv(const JointDistribution& p, const fs::path& path,
                                  const std::string& header) {
  std::ostringstream os;
  os << std::setprecision(17) << header << '\n';
  const Matrix& m = p.probabilities;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) os << r << ',' << c << ',' << m(r, c) << '\n';
  write_file(os.str(), path);
}

void write_response_csv(const ResponseMatrix& t, const fs::path& path) {
  std::ostringstream os;
  os << std::setprecision(17) << "c,n,T\n";
  for (std::size_t c = 0; c <= t.c_max(); ++c)
    for (std::size_t n = 0; n <= t.n_max(); ++n) os << c << ',' << n << ',' << t(c, n) << '\n';
  write_file(os.str(), path);
}

void write_surface_csv(const Surface& surface, const fs::path& path) {
  std::ostringstream os;
  os << std::setprecision(17) << "eta_s,eta_i,D\n";
  for (const SurfaceCell& cell : surface.cells) {
    os << cell.eta_s << ',' << cell.eta_i << ',';
    if (cell.declination) os << *cell.declination;
    os << '\n';
  }
  write_file(os.str(), path);
}

void write_json(const json& j, const fs::path& path) { write_file(j.dump(2) + "\n", path); }

json load_json(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_report(const Report& report, const fs::path& path) {
  write_json(report_to_json(report), path);
}

Report load_report(const fs::path& path) { return report_from_json(load_json(path)); }

json truth_to_json(const SimulationConfig& config) {
  return {{"field", model_to_json(config.model)},
          {"mean_pairs", config.model.mean_pairs()},
          {"detectors",
           {{"signal", detector_to_json(config.signal)}, {"idler", detector_to_json(config.idler)}}},
          {"shots", config.shots},
          {"seed", config.seed}};
}

SimulationConfig truth_from_json(const json& j) {
  try {
    SimulationConfig c;
    c.model = model_from_json(j.at("field"));
    c.signal = detector_from_json(j.at("detectors").at("signal"));
    c.idler = detector_from_json(j.at("detectors").at("idler"));
    c.shots = j.value("shots", std::uint64_t{1});
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed simulation parameters: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid simulation parameters: ") + e.what());
  }
}

}  // namespace twinbeam
