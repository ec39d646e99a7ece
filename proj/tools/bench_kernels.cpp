// Benchmark for the parallel kernels against their serial references:
// all-pairs inconsistency detection, batch name standardization, and the
// applicability filter. Inputs are synthetic and seeded, so serial and
// parallel runs are also cross-checked for equality here.

#include <omp.h>

#include <chrono>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "cpegraph/eval.hpp"

using namespace cpegraph;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string random_name(std::mt19937_64& rng, std::size_t len) {
  static const char* alphabet = "abcdefghijklmnopqrstuvwxyz";
  std::uniform_int_distribution<std::size_t> pick(0, 25);
  std::string out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[pick(rng)]);
  return out;
}

std::vector<CatalogEntry> synthetic_catalog(std::size_t vendors,
                                            std::size_t products,
                                            unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::vector<CatalogEntry> entries;
  std::uniform_int_distribution<std::size_t> name_len(5, 12);
  for (std::size_t v = 0; v < vendors; ++v) {
    std::string vendor = random_name(rng, name_len(rng));
    // A fraction of vendors get a formatting twin so the heuristics have
    // something to find.
    for (std::size_t p = 0; p < products; ++p) {
      CatalogEntry e;
      e.vendor = vendor;
      e.product = vendor + "_tool_" + std::to_string(p);
      e.versions = {"1.0", "1.1", "2.0"};
      entries.push_back(e);
      if (v % 7 == 0) {
        CatalogEntry twin = entries.back();
        twin.vendor = vendor + "-inc";
        entries.push_back(twin);
      }
    }
  }
  return entries;
}

struct Row {
  std::string kernel;
  double serial_s = 0;
  double parallel_s = 0;
  bool equal = false;
};

void print_row(const Row& row, int threads) {
  std::cout << row.kernel << ": serial " << row.serial_s << "s, parallel("
            << threads << ") " << row.parallel_s << "s, speedup "
            << (row.parallel_s > 0 ? row.serial_s / row.parallel_s : 0.0)
            << ", results " << (row.equal ? "equal" : "DIFFER") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel benchmark"};
  std::size_t vendors = 600;
  std::size_t products = 4;
  std::size_t n_vulns = 300;
  std::size_t n_assets = 24;
  std::size_t batch = 20000;
  int threads = omp_get_max_threads();
  unsigned long seed = 42;
  app.add_option("--vendors", vendors, "synthetic vendor count");
  app.add_option("--products", products, "products per vendor");
  app.add_option("--vulns", n_vulns, "synthetic vulnerability count");
  app.add_option("--assets", n_assets, "synthetic asset count");
  app.add_option("--batch", batch, "standardize batch size");
  app.add_option("--threads", threads, "parallel thread count");
  app.add_option("--seed", seed, "rng seed");
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  const auto entries = synthetic_catalog(vendors, products, seed);
  ProductCatalog catalog(entries);
  HeuristicConfig cfg;
  std::cout << "catalog: " << catalog.vendor_count() << " vendors, "
            << entries.size() << " entries\n";

  {
    Row row{"all-pairs heuristics", 0, 0, false};
    auto t0 = Clock::now();
    auto serial = detect_pairs_serial(catalog, cfg);
    row.serial_s = seconds_since(t0);
    t0 = Clock::now();
    auto parallel = detect_pairs_parallel(catalog, cfg, threads);
    row.parallel_s = seconds_since(t0);
    row.equal = serial == parallel;
    print_row(row, threads);
  }

  CanonicalDictionary dict =
      build_canonical_dictionary(entries, {}, {});
  {
    std::vector<std::string> names;
    names.reserve(batch);
    std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
    for (std::size_t i = 0; i < batch; ++i) {
      std::string name = entries[pick(rng)].vendor;
      if (i % 3 == 0) name += "x";  // force fuzzy lookups
      names.push_back(std::move(name));
    }
    Row row{"standardize batch", 0, 0, false};
    auto t0 = Clock::now();
    auto serial = standardize_batch_serial(names, dict, 0.8);
    row.serial_s = seconds_since(t0);
    t0 = Clock::now();
    auto parallel = standardize_batch_parallel(names, dict, 0.8, threads);
    row.parallel_s = seconds_since(t0);
    row.equal = serial == parallel;
    print_row(row, threads);
  }

  {
    // Synthetic store and inventory for the filter kernel: each
    // vulnerability carries running-on/with shaped configs, AND over two ORs
    // of several version leaves.
    Store store;
    std::uniform_int_distribution<std::size_t> vend(0, entries.size() - 1);
    std::uniform_int_distribution<std::size_t> width(4, 8);
    std::vector<std::string> all_versions = {"1.0", "1.1", "2.0"};
    for (std::size_t i = 0; i < n_vulns; ++i) {
      WriteBatch wb;
      auto make_or = [&](Part part) {
        std::vector<ConfigNode> leaves;
        const std::size_t n = width(rng);
        for (std::size_t k = 0; k < n; ++k) {
          const auto& e = entries[vend(rng)];
          UcpeEntry u = UcpeEntry::make(
              normalize_str(e.vendor), normalize_str(e.product),
              all_versions[(i + k) % 3], part);
          wb.ucpe.push_back(u);
          leaves.push_back(ConfigNode::leaf({u.id}));
        }
        return ConfigNode::group(ConfigOp::or_op, std::move(leaves));
      };
      VulnerabilityRecord rec;
      rec.cve_id = "CVE-2024-" + std::to_string(10000 + i);
      rec.description = "synthetic";
      StoredConfig config;
      config.cve_id = rec.cve_id;
      config.graph.root = ConfigNode::group(
          ConfigOp::and_op,
          {make_or(Part::application), make_or(Part::operating_system)});
      config.graph.config_id = "c" + std::to_string(i);
      wb.configurations = {config};
      StoredVulnerability sv;
      sv.record = rec;
      sv.config_ids = {config.graph.config_id};
      wb.vulnerabilities = {sv};
      store.put_batch(wb);
    }
    SysGraph sys;
    for (std::size_t a = 0; a < n_assets; ++a) {
      Asset asset;
      asset.asset_id = "asset-" + std::to_string(a);
      for (std::size_t c = 0; c < 40; ++c) {
        const auto& e = entries[vend(rng)];
        asset.components.push_back(
            UcpeEntry::make(normalize_str(e.vendor), normalize_str(e.product),
                            all_versions[c % 3],
                            c % 5 == 0 ? Part::operating_system
                                       : Part::application));
      }
      sys.assets.push_back(std::move(asset));
    }

    Row row{"applicability filter", 0, 0, false};
    auto t0 = Clock::now();
    auto serial = filter_serial(store, sys);
    row.serial_s = seconds_since(t0);
    t0 = Clock::now();
    auto parallel = filter_parallel(store, sys, threads);
    row.parallel_s = seconds_since(t0);
    row.equal = serial.applicable == parallel.applicable &&
                serial.filtered_out == parallel.filtered_out;
    print_row(row, threads);
  }

  return 0;
}
