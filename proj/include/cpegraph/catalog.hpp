#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cpegraph/errors.hpp"
#include "cpegraph/normalize.hpp"

namespace cpegraph {

enum class CatalogSource { cpe_dictionary, external_catalog };

const char* catalog_source_name(CatalogSource source);

struct CatalogEntry {
  std::string vendor;                 // raw, as seen in the source
  std::string product;                // raw
  std::vector<std::string> versions;  // duplicate-free
  CatalogSource source = CatalogSource::cpe_dictionary;

  bool operator==(const CatalogEntry&) const = default;

  json to_json() const;
  static CatalogEntry from_json(const json& j);
};

// Read-only index over catalog entries, keyed by raw vendor name. Each raw
// vendor is a distinct candidate entity for the inconsistency heuristics;
// products are indexed in normalized form.
class ProductCatalog {
 public:
  ProductCatalog() = default;
  explicit ProductCatalog(const std::vector<CatalogEntry>& entries);

  void add(const CatalogEntry& entry);

  bool has_vendor(std::string_view raw_vendor) const;

  // Normalized product set of a raw vendor. Throws UnknownVendor.
  const std::set<std::string>& products_of(std::string_view raw_vendor) const;

  // Versions seen for a raw (vendor, product) pair, in insertion order.
  std::vector<std::string> versions_of(std::string_view raw_vendor,
                                       std::string_view raw_product) const;

  // Raw vendor names, sorted.
  const std::vector<std::string>& vendors() const { return vendor_names_; }

  // Raw products of a vendor, sorted.
  std::vector<std::string> raw_products_of(std::string_view raw_vendor) const;

  // All (raw vendor, raw product) pairs, sorted.
  std::vector<std::pair<std::string, std::string>> vendor_product_pairs()
      const;

  std::size_t vendor_count() const { return vendor_names_.size(); }

 private:
  struct VendorData {
    std::set<std::string> norm_products;
    std::map<std::string, std::set<std::string>> versions;  // raw product key
  };

  const VendorData& vendor_data(std::string_view raw_vendor) const;

  std::map<std::string, VendorData, std::less<>> by_vendor_;
  std::vector<std::string> vendor_names_;
};

std::vector<CatalogEntry> read_catalog_jsonl(const std::string& path);
void write_catalog_jsonl(const std::string& path,
                         const std::vector<CatalogEntry>& entries);

}  // namespace cpegraph
