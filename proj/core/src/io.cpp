#include "mfswitch/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "mfswitch/error.hpp"

namespace mfswitch {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move output into " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string measure_csv(const EmpiricalMeasure& mu) {
  std::string out = "weight";
  for (std::size_t c = 0; c < mu.dim(); ++c) out += ",x" + std::to_string(c);
  out += '\n';
  for (std::size_t k = 0; k < mu.size(); ++k) {
    out += format_double(mu.weight(k));
    for (const double v : mu.atom(k)) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

namespace {

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": '" + s + "' is not a number");
  }
  return v;
}

}  // namespace

EmpiricalMeasure parse_measure_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line != "\r") header = split_csv_line(line);
  }
  if (header.empty()) throw Error(ErrorKind::ParseError, "measure file has no header");
  const bool weighted = header.front() == "weight";
  const std::size_t dim = header.size() - (weighted ? 1 : 0);
  if (dim == 0) throw Error(ErrorKind::ParseError, "line 1: no coordinate columns");
  std::vector<double> coords, weights;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                             std::to_string(header.size()) + " fields, found " +
                                             std::to_string(cells.size()));
    }
    std::size_t c = 0;
    if (weighted) weights.push_back(parse_number(cells[c++], lineno));
    for (; c < cells.size(); ++c) coords.push_back(parse_number(cells[c], lineno));
  }
  if (coords.empty()) throw Error(ErrorKind::ParseError, "measure file has no atoms");
  if (!weighted) return EmpiricalMeasure::uniform(dim, std::move(coords));
  return EmpiricalMeasure(dim, std::move(coords), std::move(weights));
}

std::string path_csv(const SwitchingPath& path) {
  std::string out = "jump_time,state\n0," + std::to_string(path.initial_state()) + '\n';
  const auto times = path.jump_times();
  const auto states = path.states();
  for (std::size_t k = 0; k < times.size(); ++k) {
    out += format_double(times[k]) + ',' + std::to_string(states[k + 1]) + '\n';
  }
  return out;
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
  std::string out = "time,regime,particle";
  for (std::size_t c = 0; c < rec.dim; ++c) out += ",x" + std::to_string(c);
  out += '\n';
  for (const auto& s : rec.snapshots) {
    const std::string prefix = format_double(s.time) + ',' + std::to_string(s.regime) + ',';
    for (std::size_t k = 0; k < s.measure.size(); ++k) {
      out += prefix + std::to_string(k);
      for (const double v : s.measure.atom(k)) out += ',' + format_double(v);
      out += '\n';
    }
  }
  return out;
}

}  // namespace mfswitch
