#include "qcm/io.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qcm {

namespace {

using nlohmann::json;

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_file(const std::filesystem::path& path) {
  return json::parse(read_all(path));
}

const json& need(const json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::runtime_error(std::string(what) + " is missing field: " + key);
  return *it;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void atomic_write(const std::filesystem::path& path, const std::string& data) {
  auto dir = path.parent_path();
  if (dir.empty()) dir = ".";
  auto tmp = dir / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file: " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void save_mask_json(const CompactMask& mask, const std::filesystem::path& path) {
  json j;
  j["level"] = mask.level();
  json px = json::array();
  for (std::size_t i = 0; i < mask.count(); ++i) {
    const auto p = mask.pixel(i);
    px.push_back({p[0], p[1]});
  }
  j["pixels"] = std::move(px);
  atomic_write(path, j.dump(2) + "\n");
}

CompactMask load_mask_json(const std::filesystem::path& path) {
  const json j = parse_file(path);
  const int level = need(j, "level", "mask JSON").get<int>();
  std::vector<std::array<std::uint32_t, 2>> px;
  for (const auto& e : need(j, "pixels", "mask JSON")) {
    if (!e.is_array() || e.size() != 2)
      throw std::runtime_error("mask JSON pixel entries must be [ix, iy] pairs");
    px.push_back({e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>()});
  }
  return CompactMask(level, px);
}

void save_mask_pbm(const CompactMask& mask, const std::filesystem::path& path) {
  if (mask.level() > 10)
    throw std::invalid_argument("mask level too deep for PBM output");
  const long long side = 1ll << mask.level();
  std::string out = "P1\n" + std::to_string(side) + " " + std::to_string(side) + "\n";
  for (long long row = 0; row < side; ++row) {
    const std::uint32_t iy = static_cast<std::uint32_t>(side - 1 - row);
    for (long long ix = 0; ix < side; ++ix) {
      out += mask.contains(static_cast<std::uint32_t>(ix), iy) ? '1' : '0';
      out += ix + 1 < side ? ' ' : '\n';
    }
  }
  atomic_write(path, out);
}

namespace {

// Skips whitespace and '#' comment lines, then reads one unsigned token.
long long pbm_token(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == EOF) throw std::runtime_error("truncated PBM header");
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      break;
    }
  }
  long long v = 0;
  if (!(in >> v)) throw std::runtime_error("truncated PBM header");
  return v;
}

}  // namespace

CompactMask load_mask_pbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || (m1 != '1' && m1 != '4'))
    throw std::runtime_error("not a PBM file: " + path.string());
  const long long w = pbm_token(in);
  const long long h = pbm_token(in);
  if (w != h || w <= 0 || (w & (w - 1)) != 0)
    throw std::runtime_error("PBM side must be a square power of two");
  int level = 0;
  while ((1ll << level) < w) ++level;
  if (level > kMaxMaskLevel) throw std::runtime_error("PBM side too large");

  std::vector<std::array<std::uint32_t, 2>> px;
  if (m1 == '1') {
    for (long long row = 0; row < h; ++row)
      for (long long ix = 0; ix < w; ++ix) {
        const long long bit = pbm_token(in);
        if (bit != 0 && bit != 1) throw std::runtime_error("PBM P1 entries must be 0 or 1");
        if (bit)
          px.push_back({static_cast<std::uint32_t>(ix),
                        static_cast<std::uint32_t>(h - 1 - row)});
      }
  } else {
    in.get();  // single whitespace after the header
    const long long stride = (w + 7) / 8;
    std::vector<char> rowbuf(static_cast<std::size_t>(stride));
    for (long long row = 0; row < h; ++row) {
      in.read(rowbuf.data(), stride);
      if (!in) throw std::runtime_error("truncated PBM data");
      for (long long ix = 0; ix < w; ++ix) {
        const unsigned byte = static_cast<unsigned char>(rowbuf[ix / 8]);
        if (byte & (0x80u >> (ix % 8)))
          px.push_back({static_cast<std::uint32_t>(ix),
                        static_cast<std::uint32_t>(h - 1 - row)});
      }
    }
  }
  return CompactMask(level, px);
}

void save_family_json(const PackingFamily& fam, const std::filesystem::path& path) {
  json j;
  j["t"] = fam.t;
  j["m"] = fam.m;
  j["norm"] = fam.norm;
  json cubes = json::array();
  for (const DyadicCube& q : fam.cubes) cubes.push_back({q.level, q.ix, q.iy});
  j["cubes"] = std::move(cubes);
  atomic_write(path, j.dump(2) + "\n");
}

PackingFamily load_family_json(const std::filesystem::path& path) {
  const json j = parse_file(path);
  PackingFamily fam;
  fam.t = need(j, "t", "family JSON").get<double>();
  fam.m = need(j, "m", "family JSON").get<int>();
  fam.norm = need(j, "norm", "family JSON").get<double>();
  for (const auto& e : need(j, "cubes", "family JSON")) {
    if (!e.is_array() || e.size() != 3)
      throw std::runtime_error("family JSON cube entries must be [level, ix, iy]");
    fam.cubes.push_back({e[0].get<int>(), e[1].get<long long>(), e[2].get<long long>()});
  }
  return fam;
}

void save_field(const GridField& f, const std::filesystem::path& json_path) {
  validate(f);
  std::filesystem::path bin_path = json_path;
  bin_path.replace_extension(".bin");

  std::string payload;
  payload.resize(f.v.size() * 2 * sizeof(double));
  char* dst = payload.data();
  for (const cplx& z : f.v) {
    const double re = z.real(), im = z.imag();
    std::memcpy(dst, &re, sizeof(double));
    std::memcpy(dst + sizeof(double), &im, sizeof(double));
    dst += 2 * sizeof(double);
  }
  atomic_write(bin_path, payload);

  json j;
  j["n"] = f.n;
  j["L"] = f.L;
  j["origin"] = {f.origin.x, f.origin.y};
  j["data"] = bin_path.filename().string();
  atomic_write(json_path, j.dump(2) + "\n");
}

GridField load_field(const std::filesystem::path& json_path) {
  const json j = parse_file(json_path);
  GridField f;
  f.n = need(j, "n", "field JSON").get<int>();
  f.L = need(j, "L", "field JSON").get<double>();
  const auto& org = need(j, "origin", "field JSON");
  f.origin = {org.at(0).get<double>(), org.at(1).get<double>()};
  std::filesystem::path bin(need(j, "data", "field JSON").get<std::string>());
  if (bin.is_relative()) bin = json_path.parent_path() / bin;

  const std::string payload = read_all(bin);
  const std::size_t count = static_cast<std::size_t>(f.n) * static_cast<std::size_t>(f.n);
  if (payload.size() != count * 2 * sizeof(double))
    throw std::runtime_error("field data size mismatch: " + bin.string());
  f.v.resize(count);
  const char* src = payload.data();
  for (cplx& z : f.v) {
    double re, im;
    std::memcpy(&re, src, sizeof(double));
    std::memcpy(&im, src + sizeof(double), sizeof(double));
    z = cplx(re, im);
    src += 2 * sizeof(double);
  }
  validate(f);
  return f;
}

namespace {

json report_to_json_obj(const ExperimentReport& rep) {
  json j;
  j["kind"] = rep.kind;
  j["params"] = rep.params;
  j["measured"] = rep.measured;
  j["bounds"] = rep.bounds;
  j["verdicts"] = rep.verdicts;
  j["runtime_ms"] = rep.runtime_ms;
  return j;
}

}  // namespace

std::string report_to_json(const ExperimentReport& rep) {
  return report_to_json_obj(rep).dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentReport rep;
  rep.kind = need(j, "kind", "report JSON").get<std::string>();
  rep.params = need(j, "params", "report JSON").get<std::map<std::string, double>>();
  rep.measured = need(j, "measured", "report JSON").get<std::map<std::string, double>>();
  rep.bounds = need(j, "bounds", "report JSON").get<std::map<std::string, double>>();
  rep.verdicts = need(j, "verdicts", "report JSON").get<std::map<std::string, bool>>();
  rep.runtime_ms = need(j, "runtime_ms", "report JSON").get<std::int64_t>();
  return rep;
}

void save_report_json(const ExperimentReport& rep, const std::filesystem::path& path) {
  atomic_write(path, report_to_json(rep));
}

ExperimentReport load_report_json(const std::filesystem::path& path) {
  return report_from_json(read_all(path));
}

std::string reports_to_csv(const std::vector<ExperimentReport>& reps) {
  std::set<std::string> cols;
  for (const auto& r : reps) {
    for (const auto& [k, v] : r.params) cols.insert("param." + k);
    for (const auto& [k, v] : r.measured) cols.insert("measured." + k);
    for (const auto& [k, v] : r.bounds) cols.insert("bound." + k);
    for (const auto& [k, v] : r.verdicts) cols.insert("verdict." + k);
  }
  std::string out = "kind,runtime_ms";
  for (const auto& c : cols) out += "," + c;
  out += "\n";
  for (const auto& r : reps) {
    out += r.kind + "," + std::to_string(r.runtime_ms);
    for (const auto& c : cols) {
      out += ",";
      const auto dot = c.find('.');
      const std::string group = c.substr(0, dot), key = c.substr(dot + 1);
      if (group == "param") {
        auto it = r.params.find(key);
        if (it != r.params.end()) out += format_double(it->second);
      } else if (group == "measured") {
        auto it = r.measured.find(key);
        if (it != r.measured.end()) out += format_double(it->second);
      } else if (group == "bound") {
        auto it = r.bounds.find(key);
        if (it != r.bounds.end()) out += format_double(it->second);
      } else {
        auto it = r.verdicts.find(key);
        if (it != r.verdicts.end()) out += it->second ? "1" : "0";
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace qcm
