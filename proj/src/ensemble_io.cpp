#include "harnack/ensemble_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include "json.hpp"
#include <stdexcept>

#include "harnack/stats.hpp"

namespace harnack {

static_assert(std::endian::native == std::endian::little, "column files are written in native little-endian order");

namespace {

std::string column_name(const std::string& base, std::size_t mode) {
  return base + "_mode" + std::to_string(mode + 1) + ".f64";
}

}  // namespace

std::filesystem::path write_ensemble(const PathEnsemble& ens, const std::filesystem::path& dir,
                                     const std::string& base, std::uint64_t model_hash) {
  std::filesystem::create_directories(dir);
  nlohmann::json columns = nlohmann::json::array();
  for (std::size_t k = 0; k < ens.dim(); ++k) {
    const std::string name = column_name(base, k);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    for (std::size_t p = 0; p < ens.paths(); ++p)
      for (std::size_t s = 0; s < ens.slots(); ++s) {
        const double v = ens.state(p, s)[k];
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    columns.push_back(name);
  }
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(model_hash));
  const auto& prov = ens.provenance();
  nlohmann::json manifest = {
      {"provenance",
       {{"model_id", prov.model_id}, {"drift_id", prov.drift_id}, {"scheme_id", prov.scheme_id}, {"seed", prov.seed}}},
      {"model_hash", hash},
      {"grid", {{"t_end", ens.grid().t_end()}, {"steps", ens.grid().steps()}, {"dt", ens.grid().dt()}}},
      {"recorded_steps", ens.recorded()},
      {"paths", ens.paths()},
      {"dim", ens.dim()},
      {"dtype", "float64-le"},
      {"layout", "one file per mode, [path][slot]"},
      {"columns", columns},
  };
  const auto path = dir / (base + ".json");
  std::ofstream(path) << manifest.dump(2) << '\n';
  return path;
}

PathEnsemble read_ensemble(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot read " + manifest_path.string());
  const auto m = nlohmann::json::parse(in);
  const auto& prov = m.at("provenance");
  Provenance p{prov.at("model_id"), prov.at("drift_id"), prov.at("scheme_id"), prov.at("seed")};
  const TimeGrid grid(m.at("grid").at("t_end").get<double>(), m.at("grid").at("steps").get<std::size_t>());
  PathEnsemble ens(m.at("paths").get<std::size_t>(), m.at("dim").get<std::size_t>(), grid,
                   m.at("recorded_steps").get<std::vector<std::size_t>>(), p);
  const auto dir = manifest_path.parent_path();
  const auto& columns = m.at("columns");
  if (columns.size() != ens.dim()) throw std::runtime_error("manifest column count does not match dim");
  for (std::size_t k = 0; k < ens.dim(); ++k) {
    std::ifstream col(dir / columns[k].get<std::string>(), std::ios::binary);
    if (!col) throw std::runtime_error("missing column file " + columns[k].get<std::string>());
    for (std::size_t path = 0; path < ens.paths(); ++path)
      for (std::size_t s = 0; s < ens.slots(); ++s) {
        double v;
        if (!col.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated column file");
        ens.state(path, s)[k] = v;
      }
  }
  return ens;
}

void write_time_summary_csv(const PathEnsemble& ens, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "t,mode,mean,variance,stderr\n";
  char line[160];
  for (std::size_t s = 0; s < ens.slots(); ++s)
    for (std::size_t k = 0; k < ens.dim(); ++k) {
      const Vec col = ens.column(s, k);
      const auto e = estimate_from_samples(col);
      std::snprintf(line, sizeof line, "%.17g,%zu,%.17g,%.17g,%.17g\n", ens.time(s), k + 1, e.mean,
                    sample_variance(col), e.std_error);
      out << line;
    }
}

}  // namespace harnack
