#include "fracpath/branch_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "fracpath/errors.hpp"

namespace fracpath {

namespace {

constexpr const char* kHeader =
    "index,mu,norm2,norm8,n_unstable,event,tangent_mu,step_used";

EventType event_from_name(const std::string& s, const std::string& where) {
  if (s == "none") return EventType::none;
  if (s == "fold") return EventType::fold;
  if (s == "branch_point") return EventType::branch_point;
  if (s == "hopf") return EventType::hopf;
  throw ParseError(where + ": unknown event tag '" + s + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError(where + ": bad numeric field '" + s + "'");
  return v;
}

int parse_int(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError(where + ": bad integer field '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_branch_csv(const Branch& br, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << kHeader << "\n";
  for (const auto& r : br.records) {
    f << r.index << ',' << format_g17(r.mu) << ',' << format_g17(r.norm2)
      << ',' << format_g17(r.norm8) << ',' << r.stab.total << ','
      << event_name(r.event) << ',' << format_g17(r.tangent_mu) << ','
      << format_g17(r.step_used) << "\n";
  }
  if (!f.flush()) throw IoError("write to '" + path.string() + "' failed");
}

Branch read_branch_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(f, line))
    throw ParseError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader)
    throw ParseError(path.string() + ": unexpected header '" + line + "'");
  Branch br;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto fields = split_csv_line(line);
    if (fields.size() != 8)
      throw ParseError(where + ": expected 8 fields, got " +
                       std::to_string(fields.size()));
    BranchRecord r;
    r.index = parse_int(fields[0], where);
    r.mu = parse_double(fields[1], where);
    r.norm2 = parse_double(fields[2], where);
    r.norm8 = parse_double(fields[3], where);
    r.stab.total = parse_int(fields[4], where);
    r.event = event_from_name(fields[5], where);
    r.tangent_mu = parse_double(fields[6], where);
    r.step_used = parse_double(fields[7], where);
    if (r.event == EventType::fold) ++br.n_folds;
    br.records.push_back(std::move(r));
  }
  return br;
}

void write_snapshot_csv(const Model& model, const Vec& u,
                        const std::filesystem::path& path) {
  const int nc = model.components();
  const Vec x = model.fem().mesh.nodes();
  std::vector<Vec> cols(nc);
  for (int c = 0; c < nc; ++c)
    cols[c] = model.fem().prolong(model.component(u, c));
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << "x,u1";
  if (nc > 1) f << ",u2";
  f << "\n";
  for (int i = 0; i < x.size(); ++i) {
    f << format_g17(x[i]);
    for (int c = 0; c < nc; ++c) f << ',' << format_g17(cols[c][i]);
    f << "\n";
  }
  if (!f.flush()) throw IoError("write to '" + path.string() + "' failed");
}

Snapshot read_snapshot_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(f, line))
    throw ParseError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int nc = 0;
  if (line == "x,u1") nc = 1;
  else if (line == "x,u1,u2") nc = 2;
  else throw ParseError(path.string() + ": unexpected header '" + line + "'");
  std::vector<double> xs;
  std::vector<std::vector<double>> us(nc);
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != nc + 1)
      throw ParseError(where + ": wrong field count");
    xs.push_back(parse_double(fields[0], where));
    for (int c = 0; c < nc; ++c)
      us[c].push_back(parse_double(fields[c + 1], where));
  }
  Snapshot snap;
  snap.x = Eigen::Map<Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  snap.u.resize(xs.size(), nc);
  for (int c = 0; c < nc; ++c)
    snap.u.col(c) = Eigen::Map<Vec>(us[c].data(), static_cast<Eigen::Index>(us[c].size()));
  return snap;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace fracpath
