#pragma once

// Field snapshots: raw little-endian float64 in storage order (y outer,
// x inner) in <base>.f64, plus a JSON sidecar <base>.json with
// {nx, ny, lx, ly, time, name}.

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "kskit/common.hpp"
#include "kskit/grid.hpp"

namespace kskit {

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little-endian host");

struct Snapshot {
  Field field;
  double time = 0.0;
  std::string name;
};

inline void write_snapshot(const std::filesystem::path& base,
                           const Field& f, double time,
                           const std::string& name) {
  {
    std::ofstream raw(base.string() + ".f64", std::ios::binary);
    if (!raw)
      throw std::runtime_error("write_snapshot: cannot open " + base.string());
    raw.write(reinterpret_cast<const char*>(f.data()),
              static_cast<std::streamsize>(f.size() * sizeof(double)));
  }
  nlohmann::json meta;
  meta["nx"] = f.grid().nx;
  meta["ny"] = f.grid().ny;
  meta["lx"] = f.grid().lx;
  meta["ly"] = f.grid().ly;
  meta["time"] = time;
  meta["name"] = name;
  std::ofstream side(base.string() + ".json");
  side << meta.dump(2) << "\n";
}

inline Snapshot read_snapshot(const std::filesystem::path& base) {
  std::ifstream side(base.string() + ".json");
  if (!side)
    throw std::runtime_error("read_snapshot: cannot open " + base.string() +
                             ".json");
  nlohmann::json meta = nlohmann::json::parse(side);
  const Grid g = Grid::periodic(meta.at("nx").get<int>(),
                                meta.at("ny").get<int>(),
                                meta.at("lx").get<double>(),
                                meta.at("ly").get<double>());
  Snapshot s{Field(g), meta.at("time").get<double>(),
             meta.at("name").get<std::string>()};
  std::ifstream raw(base.string() + ".f64", std::ios::binary);
  if (!raw)
    throw std::runtime_error("read_snapshot: cannot open " + base.string() +
                             ".f64");
  raw.read(reinterpret_cast<char*>(s.field.data()),
           static_cast<std::streamsize>(s.field.size() * sizeof(double)));
  if (static_cast<std::size_t>(raw.gcount()) !=
      s.field.size() * sizeof(double))
    throw std::runtime_error("read_snapshot: short read on " + base.string());
  return s;
}

}  // namespace kskit
