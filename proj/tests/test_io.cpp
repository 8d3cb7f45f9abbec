#include <filesystem>
#include <fstream>
#include <sstream>

#include "agg/errors.hpp"
#include "agg/io.hpp"
#include "doctest.h"

using namespace agg;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "agg_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("SHA-256 test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("mask CSV round trip") {
  const LatticeSpec spec(2, 0.25, make_coord({-3, 2}), make_coord({5, 4}));
  DomainMask m(spec);
  m.at(make_coord({-3, 2})) = 1;
  m.at(make_coord({1, 5})) = 1;
  const auto path = scratch("mask.csv");
  write_mask_csv(m, path);
  const DomainMask back = read_mask_csv(path);
  CHECK(back.spec() == spec);
  CHECK(back == m);
}

TEST_CASE("mask CSV without a lattice comment") {
  const auto path = scratch("bare.csv");
  std::ofstream(path) << "0,0\n2,1\n";
  const DomainMask m = read_mask_csv(path);
  CHECK(count(m) == 2);
  CHECK(m.spec().spacing() == 1.0);
  std::ofstream(path) << "0,x\n";
  CHECK_THROWS_AS(read_mask_csv(path), ValidationError);
}

TEST_CASE("PGM layout: top row is the largest y") {
  const LatticeSpec spec(2, 1.0, make_coord({0, 0}), make_coord({3, 3}));
  DomainMask m(spec);
  m.at(make_coord({0, 2})) = 1;
  const auto path = scratch("mask.pgm");
  write_mask_pgm(m, path);
  const std::string bytes = slurp(path);
  CHECK(bytes.rfind("P5\n# spacing=1 origin_offset=0,0\n3 3\n255\n", 0) == 0);
  const std::string pixels = bytes.substr(bytes.size() - 9);
  CHECK(static_cast<unsigned char>(pixels[0]) == 255);
  CHECK(pixels[1] == 0);
  CHECK(pixels[3] == 0);
}

TEST_CASE("PGM needs two dimensions") {
  DomainMask m(LatticeSpec::centered(3, 1.0, 2));
  CHECK_THROWS_AS(write_mask_pgm(m, scratch("bad.pgm")), WrongDimensionError);
}

TEST_CASE("field CSV round-trips doubles") {
  ScalarField f(LatticeSpec::centered(2, 1.0, 1));
  f.at(Coord{}) = 0.1 + 0.2;
  const auto path = scratch("field.csv");
  write_field_csv(f, path);
  std::ifstream is(path);
  std::string line;
  double value = 0.0;
  while (std::getline(is, line)) {
    if (line.rfind("0,0,", 0) == 0) value = std::stod(line.substr(4));
  }
  CHECK(value == 0.1 + 0.2);
}

TEST_CASE("rotor PGM records the direction order") {
  const auto spec = LatticeSpec::centered(2, 1.0, 2);
  const RotorField r = RotorField::uniform(spec, 3);
  const auto path = scratch("rotors.pgm");
  write_rotor_pgm(r, path);
  const std::string bytes = slurp(path);
  CHECK(bytes.find("directions=") != std::string::npos);
  CHECK(static_cast<unsigned char>(bytes.back()) == 255);
}
