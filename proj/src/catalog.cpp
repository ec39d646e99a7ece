#include "cpegraph/catalog.hpp"

#include <algorithm>

#include "cpegraph/jsonl.hpp"

namespace cpegraph {

const char* catalog_source_name(CatalogSource source) {
  return source == CatalogSource::cpe_dictionary ? "cpe_dictionary"
                                                 : "external_catalog";
}

json CatalogEntry::to_json() const {
  return json{{"vendor", vendor},
              {"product", product},
              {"versions", versions},
              {"source", catalog_source_name(source)}};
}

CatalogEntry CatalogEntry::from_json(const json& j) {
  CatalogEntry e;
  e.vendor = j.at("vendor").get<std::string>();
  e.product = j.at("product").get<std::string>();
  if (j.contains("versions")) {
    e.versions = j.at("versions").get<std::vector<std::string>>();
  }
  e.source = j.value("source", "external_catalog") == "cpe_dictionary"
                 ? CatalogSource::cpe_dictionary
                 : CatalogSource::external_catalog;
  return e;
}

ProductCatalog::ProductCatalog(const std::vector<CatalogEntry>& entries) {
  for (const auto& entry : entries) add(entry);
}

void ProductCatalog::add(const CatalogEntry& entry) {
  auto [it, inserted] = by_vendor_.try_emplace(entry.vendor);
  if (inserted) {
    vendor_names_.insert(std::upper_bound(vendor_names_.begin(),
                                          vendor_names_.end(), entry.vendor),
                         entry.vendor);
  }
  it->second.norm_products.insert(normalize_str(entry.product));
  auto& versions = it->second.versions[entry.product];
  for (const auto& v : entry.versions) versions.insert(v);
}

bool ProductCatalog::has_vendor(std::string_view raw_vendor) const {
  return by_vendor_.find(raw_vendor) != by_vendor_.end();
}

const ProductCatalog::VendorData& ProductCatalog::vendor_data(
    std::string_view raw_vendor) const {
  auto it = by_vendor_.find(raw_vendor);
  if (it == by_vendor_.end()) {
    throw Error(errc::unknown_vendor, "inconsistency",
                "vendor not in catalog: " + std::string(raw_vendor));
  }
  return it->second;
}

const std::set<std::string>& ProductCatalog::products_of(
    std::string_view raw_vendor) const {
  return vendor_data(raw_vendor).norm_products;
}

std::vector<std::string> ProductCatalog::versions_of(
    std::string_view raw_vendor, std::string_view raw_product) const {
  const auto& data = vendor_data(raw_vendor);
  auto it = data.versions.find(std::string(raw_product));
  if (it == data.versions.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<std::string> ProductCatalog::raw_products_of(
    std::string_view raw_vendor) const {
  const auto& data = vendor_data(raw_vendor);
  std::vector<std::string> out;
  out.reserve(data.versions.size());
  for (const auto& [product, _] : data.versions) out.push_back(product);
  return out;
}

std::vector<std::pair<std::string, std::string>>
ProductCatalog::vendor_product_pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [vendor, data] : by_vendor_) {
    for (const auto& [product, _] : data.versions) {
      out.emplace_back(vendor, product);
    }
  }
  return out;
}

std::vector<CatalogEntry> read_catalog_jsonl(const std::string& path) {
  std::vector<CatalogEntry> out;
  for (const json& j : read_jsonl(path, "feed_ingest")) {
    out.push_back(CatalogEntry::from_json(j));
  }
  return out;
}

void write_catalog_jsonl(const std::string& path,
                         const std::vector<CatalogEntry>& entries) {
  std::vector<json> docs;
  docs.reserve(entries.size());
  for (const auto& e : entries) docs.push_back(e.to_json());
  write_jsonl(path, docs, "feed_ingest");
}

}  // namespace cpegraph
