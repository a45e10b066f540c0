#include "hgl/field_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "hgl/integer_base.hpp"

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; byte swapping not implemented");

namespace hgl {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad(const std::string& msg) {
  throw std::runtime_error("field file: " + msg);
}

}  // namespace

void dump_field(const Field& field, const std::string& path) {
  const Grid& g = *field.grid;
  const auto& base = g.base();
  std::ostringstream head;
  head << "HGPF1\n";
  head << "n = " << base.n << "\n";
  head << "omega =";
  for (const auto& w : base.omega) head << " " << w.str();
  head << "\n";
  for (std::size_t j = 0; j < base.k.size(); ++j) {
    head << "k" << (j + 1) << " =";
    for (int i = 0; i < base.k[j].size(); ++i) head << " " << base.k[j][i];
    head << "\n";
  }
  head << "theta = " << base.theta << "\n";
  head << "q_den = " << base.q_den << "\n";
  head << "p = " << g.spec().p << "\n";
  head << "M = " << fmt(g.spec().M) << "\n";
  head << "L = " << fmt(g.spec().L) << "\n";
  head << "delta = " << fmt(g.spec().delta) << "\n";
  head << "resolutions =";
  for (int j = 0; j < g.num_transverse(); ++j) head << " " << g.transverse_res(j);
  head << " " << g.along_res() << " " << g.vertical_res() << "\n";
  head << "dalpha = " << g.dalpha_exact().str() << "\n";
  head << "nodes = " << g.size() << "\n";
  head << "\n";

  std::ofstream os(path, std::ios::binary);
  if (!os) bad("cannot open '" + path + "' for writing");
  const std::string h = head.str();
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  os.write(reinterpret_cast<const char*>(field.values.data()),
           static_cast<std::streamsize>(sizeof(double) * field.values.size()));
  if (!os) bad("write failed for '" + path + "'");
}

namespace {

struct Header {
  std::map<std::string, std::string> kv;
  std::streampos payload_start;
};

Header read_header(std::ifstream& is) {
  std::string magic(6, '\0');
  is.read(magic.data(), 6);
  if (!is || magic != "HGPF1\n") bad("bad magic");
  Header h;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) break;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) bad("malformed header line '" + line + "'");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!val.empty() && val.front() == ' ') val.erase(val.begin());
    h.kv[key] = val;
  }
  if (!is) bad("truncated header");
  h.payload_start = is.tellg();
  return h;
}

const std::string& need(const Header& h, const std::string& key) {
  auto it = h.kv.find(key);
  if (it == h.kv.end()) bad("missing header key '" + key + "'");
  return it->second;
}

Rational parse_rat(const std::string& s) {
  const std::size_t slash = s.find('/');
  if (slash == std::string::npos) return Rational(std::stoll(s));
  return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

std::shared_ptr<const Grid> grid_from_header(const Header& h) {
  const int n = std::stoi(need(h, "n"));
  const int dz = 2 * n;
  CellSpec cell;
  auto omega_tokens = split(need(h, "omega"));
  if (static_cast<int>(omega_tokens.size()) != dz) bad("omega length mismatch");
  RationalVector omega(dz);
  for (int i = 0; i < dz; ++i) omega[i] = parse_rat(omega_tokens[i]);
  cell.base = build_integer_base(omega);
  // The stored base must agree with the reconstruction; otherwise the twist
  // bookkeeping would silently differ.
  for (int j = 0; j < dz; ++j) {
    auto ks = split(need(h, "k" + std::to_string(j + 1)));
    if (static_cast<int>(ks.size()) != dz) bad("base vector length mismatch");
    for (int i = 0; i < dz; ++i)
      if (std::stoll(ks[i]) != cell.base.k[j][i]) bad("stored base disagrees with omega");
  }
  if (std::stoll(need(h, "theta")) != cell.base.theta) bad("theta mismatch");
  cell.p = std::stoi(need(h, "p"));
  cell.M = std::stod(need(h, "M"));
  cell.L = std::stod(need(h, "L"));
  cell.delta = std::stod(need(h, "delta"));

  GridResolution res;
  auto rs = split(need(h, "resolutions"));
  if (static_cast<int>(rs.size()) != dz + 1) bad("resolutions length mismatch");
  for (int j = 0; j < dz - 1; ++j) res.transverse.push_back(std::stoi(rs[j]));
  res.along = std::stoi(rs[dz - 1]);
  res.vertical = std::stoi(rs[dz]);

  auto grid = make_grid(cell, res);
  if (!(grid->dalpha_exact() == parse_rat(need(h, "dalpha"))))
    bad("stored spacing disagrees with the rebuilt grid");
  if (grid->size() != std::stoll(need(h, "nodes"))) bad("node count mismatch");
  return grid;
}

Field load_payload(std::ifstream& is, const Header& h, std::shared_ptr<const Grid> grid) {
  Field f(grid);
  const std::int64_t n = grid->size();
  is.seekg(h.payload_start);
  is.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(sizeof(double) * n));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(double) * n))
    bad("truncated payload (expected " + std::to_string(n) + " values)");
  char extra;
  if (is.read(&extra, 1)) bad("trailing bytes after payload");
  return f;
}

}  // namespace

Field load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) bad("cannot open '" + path + "'");
  Header h = read_header(is);
  return load_payload(is, h, grid_from_header(h));
}

Field load_field(const std::string& path, std::shared_ptr<const Grid> grid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) bad("cannot open '" + path + "'");
  Header h = read_header(is);
  auto rebuilt = grid_from_header(h);
  if (rebuilt->size() != grid->size() || rebuilt->dim_z() != grid->dim_z() ||
      !(rebuilt->dalpha_exact() == grid->dalpha_exact()) ||
      rebuilt->spec().p != grid->spec().p || rebuilt->spec().M != grid->spec().M ||
      rebuilt->spec().delta != grid->spec().delta)
    bad("field does not match the target grid");
  for (int j = 0; j < grid->dim_z(); ++j)
    if (rebuilt->base().k[j] != grid->base().k[j]) bad("field does not match the target grid");
  return load_payload(is, h, grid);
}

}  // namespace hgl
