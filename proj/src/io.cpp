#include "agg/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

namespace agg {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write " + path.string());
  return os;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    const auto* first = item.data();
    const auto* last = item.data() + item.size();
    while (first < last && *first == ' ') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || (ptr != last && *ptr != ' ' && *ptr != '\r')) {
      throw ValidationError("bad integer list '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string join(const Coord& c, int dim) {
  std::string s;
  for (int i = 0; i < dim; ++i) {
    if (i > 0) s += ',';
    s += std::to_string(c[i]);
  }
  return s;
}

void write_pgm(const LatticeSpec& spec, const std::vector<std::uint8_t>& gray, const std::filesystem::path& path,
               const std::string& note) {
  if (spec.dim() != 2) throw WrongDimensionError("PGM output needs a 2-dimensional lattice");
  const Point origin = spec.origin_offset();
  const int width = spec.extent()[0];
  const int height = spec.extent()[1];
  auto os = open_out(path);
  std::ostringstream header;
  header << std::setprecision(17) << "P5\n# spacing=" << spec.spacing() << " origin_offset=" << origin[0] << ','
         << origin[1];
  if (!note.empty()) header << ' ' << note;
  header << '\n' << width << ' ' << height << "\n255\n";
  os << header.str();
  std::vector<char> row(static_cast<std::size_t>(width));
  for (int r = 0; r < height; ++r) {
    const int y = spec.hi()[1] - r;
    for (int x = 0; x < width; ++x) {
      row[static_cast<std::size_t>(x)] =
          static_cast<char>(gray[spec.index(make_coord({spec.lo()[0] + x, y}))]);
    }
    os.write(row.data(), width);
  }
  if (!os) throw ValidationError("failed writing " + path.string());
}

}  // namespace

void write_mask_csv(const DomainMask& mask, const std::filesystem::path& path) {
  const LatticeSpec& spec = mask.spec();
  auto os = open_out(path);
  os << std::setprecision(17) << "# lattice dim=" << spec.dim() << " spacing=" << spec.spacing()
     << " lo=" << join(spec.lo(), spec.dim()) << " extent=" << join(spec.extent(), spec.dim()) << '\n';
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) os << join(spec.coord(i), spec.dim()) << '\n';
  }
}

DomainMask read_mask_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open " + path.string());
  std::optional<LatticeSpec> spec;
  std::vector<std::vector<int>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string word;
      int dim = 0;
      double spacing = 0.0;
      std::vector<int> lo;
      std::vector<int> extent;
      bool lattice = false;
      while (ls >> word) {
        if (word == "lattice") lattice = true;
        else if (word.rfind("dim=", 0) == 0) dim = std::stoi(word.substr(4));
        else if (word.rfind("spacing=", 0) == 0) spacing = std::stod(word.substr(8));
        else if (word.rfind("lo=", 0) == 0) lo = parse_ints(word.substr(3));
        else if (word.rfind("extent=", 0) == 0) extent = parse_ints(word.substr(7));
      }
      if (lattice) {
        if (static_cast<int>(lo.size()) != dim || static_cast<int>(extent.size()) != dim) {
          throw ValidationError("malformed lattice comment in " + path.string());
        }
        Coord clo{};
        Coord cext{};
        std::copy(lo.begin(), lo.end(), clo.begin());
        std::copy(extent.begin(), extent.end(), cext.begin());
        spec.emplace(dim, spacing, clo, cext);
      }
      continue;
    }
    rows.push_back(parse_ints(line));
  }
  if (!spec) {
    if (rows.empty()) throw ValidationError(path.string() + " holds no sites and no lattice comment");
    const int dim = static_cast<int>(rows.front().size());
    Coord lo{};
    Coord hi{};
    for (int a = 0; a < dim; ++a) {
      lo[a] = rows.front()[a];
      hi[a] = rows.front()[a];
    }
    for (const auto& r : rows) {
      for (int a = 0; a < dim; ++a) {
        lo[a] = std::min(lo[a], r[a]);
        hi[a] = std::max(hi[a], r[a]);
      }
    }
    Coord extent{};
    for (int a = 0; a < dim; ++a) {
      lo[a] -= 1;
      extent[a] = hi[a] - lo[a] + 2;
    }
    spec.emplace(dim, 1.0, lo, extent);
  }
  DomainMask mask(*spec);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != spec->dim()) throw ValidationError("coordinate row has the wrong length");
    Coord c{};
    std::copy(r.begin(), r.end(), c.begin());
    mask[spec->checked_index(c)] = 1;
  }
  return mask;
}

void write_mask_pgm(const DomainMask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> gray(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) gray[i] = mask[i] ? 255 : 0;
  write_pgm(mask.spec(), gray, path, "");
}

void write_rotor_pgm(const RotorField& rotors, const std::filesystem::path& path) {
  const int levels = rotors.order().size();
  std::vector<std::uint8_t> gray(rotors.values().size());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = static_cast<std::uint8_t>(rotors[i] * 255 / (levels - 1));
  write_pgm(rotors.spec(), gray, path, "directions=" + rotors.order().describe());
}

void write_field_csv(const ScalarField& field, const std::filesystem::path& path) {
  const LatticeSpec& spec = field.spec();
  auto os = open_out(path);
  std::array<char, 32> buf{};
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), field[i]);
    os << join(spec.coord(i), spec.dim()) << ',' << std::string_view(buf.data(), static_cast<std::size_t>(ptr - buf.data()))
       << '\n';
  }
}

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return sha256_hex(buf.str());
}

}  // namespace agg
