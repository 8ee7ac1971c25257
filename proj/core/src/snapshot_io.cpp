#include "meanfield/snapshot_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "meanfield/errors.hpp"

namespace meanfield {

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, end);
}

void write_ensemble_csv(std::ostream& out, const PhaseEnsemble& ensemble) {
  const int d = ensemble.dim();
  out << "id";
  for (int k = 1; k <= d; ++k) out << ",x" << k;
  for (int k = 1; k <= d; ++k) out << ",v" << k;
  out << '\n';
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    out << i;
    for (int k = 0; k < d; ++k) out << ',' << format_double(ensemble.position_coord(k)[i]);
    for (int k = 0; k < d; ++k) out << ',' << format_double(ensemble.velocity_coord(k)[i]);
    out << '\n';
  }
}

void write_ensemble_csv(const std::filesystem::path& path, const PhaseEnsemble& ensemble) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  write_ensemble_csv(out, ensemble);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, std::size_t line_no) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("line " + std::to_string(line_no) + ": bad number '" + text + "'");
  }
  return value;
}

}  // namespace

PhaseEnsemble read_ensemble_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty ensemble csv");
  const auto header = split(line);
  if (header.size() < 5 || header.size() % 2 == 0 || header[0] != "id") {
    throw ConfigError("ensemble csv: expected header id,x1..xd,v1..vd");
  }
  const int d = static_cast<int>((header.size() - 1) / 2);
  for (int k = 1; k <= d; ++k) {
    if (header[k] != "x" + std::to_string(k) || header[d + k] != "v" + std::to_string(k)) {
      throw ConfigError("ensemble csv: expected header id,x1..xd,v1..vd");
    }
  }

  std::vector<Vec> xs, vs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw ConfigError("line " + std::to_string(line_no) + ": wrong field count");
    }
    if (fields[0] != std::to_string(xs.size())) {
      throw ConfigError("line " + std::to_string(line_no) + ": ids must run 0,1,2,...");
    }
    Vec x(d), v(d);
    for (int k = 0; k < d; ++k) {
      x[k] = parse_double(fields[1 + k], line_no);
      v[k] = parse_double(fields[1 + d + k], line_no);
    }
    xs.push_back(x);
    vs.push_back(v);
  }
  if (xs.empty()) throw ConfigError("ensemble csv has no particles");

  PhaseEnsemble out(d, xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.set_position(i, xs[i]);
    out.set_velocity(i, vs[i]);
  }
  return out;
}

PhaseEnsemble read_ensemble_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_ensemble_csv(in);
}

}  // namespace meanfield
