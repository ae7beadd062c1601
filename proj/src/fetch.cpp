#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <map>
#include <regex>

#include <fmt/format.h>
#include <json.hpp>

#include "squit/error.hpp"
#include "squit/kb.hpp"

namespace squit {

namespace {

// WikiData classes for the domains the bundled recipes use. Other names are
// resolved by English label at query time.
const std::map<std::string, std::string, std::less<>> kKnownClasses = {
    {"person", "Q5"},
    {"film", "Q11424"},
    {"literary work", "Q7725634"},
    {"television series", "Q5398426"},
    {"chemical compound", "Q11173"},
};

std::string escape_literal(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string last_segment(const std::string& uri) {
  auto slash = uri.find_last_of("/#");
  return slash == std::string::npos ? uri : uri.substr(slash + 1);
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ContractError("invalid endpoint URL: " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

}  // namespace

std::string entity_query(const std::string& domain_type, std::size_t entity_limit) {
  std::string type_pattern;
  auto known = kKnownClasses.find(domain_type);
  if (known != kKnownClasses.end()) {
    type_pattern = fmt::format("?item wdt:P31 wd:{} .", known->second);
  } else if (std::regex_match(domain_type, std::regex(R"(Q[0-9]+)"))) {
    type_pattern = fmt::format("?item wdt:P31 wd:{} .", domain_type);
  } else {
    type_pattern = fmt::format("?type rdfs:label \"{}\"@en . ?item wdt:P31 ?type .",
                               escape_literal(domain_type));
  }
  return fmt::format(
      "SELECT ?item ?label WHERE {{ "
      "{{ SELECT DISTINCT ?item WHERE {{ {} }} LIMIT {} }} "
      "?item rdfs:label|skos:altLabel ?label . "
      "FILTER ( LANG ( ?label ) = \"en\" ) }}",
      type_pattern, entity_limit);
}

std::vector<EntityRecord> parse_entity_results(std::string_view body,
                                               const std::string& domain_type,
                                               std::size_t entity_limit) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw ProtocolError("endpoint returned invalid JSON");
  const auto results = doc.find("results");
  if (results == doc.end() || !results->is_object() || !results->contains("bindings") ||
      !(*results)["bindings"].is_array())
    throw ProtocolError("endpoint response has no results.bindings array");

  std::vector<std::string> raw_order;
  std::map<std::string, std::vector<std::string>> raw_labels;
  for (const auto& binding : (*results)["bindings"]) {
    if (!binding.is_object()) throw ProtocolError("binding is not an object");
    auto item = binding.find("item");
    auto label = binding.find("label");
    if (item == binding.end() || !item->is_object() || !item->contains("value") ||
        !(*item)["value"].is_string())
      throw ProtocolError("binding has no ?item value");
    const std::string id = last_segment((*item)["value"].get<std::string>());
    auto [it, inserted] = raw_labels.try_emplace(id);
    if (inserted) raw_order.push_back(id);
    if (label == binding.end()) continue;
    if (!label->is_object() || !label->contains("value") || !(*label)["value"].is_string())
      throw ProtocolError("binding ?label is malformed");
    it->second.push_back((*label)["value"].get<std::string>());
  }

  std::vector<EntityRecord> entities;
  for (const auto& id : raw_order) {
    if (entities.size() >= entity_limit) break;
    auto labels = filter_labels(raw_labels[id], /*drop_id_suffix=*/false);
    if (labels.empty()) continue;
    entities.push_back({id, std::move(labels), domain_type});
  }
  return entities;
}

KnowledgeSlice fetch_slice(const std::string& endpoint, const std::string& domain_type,
                           std::size_t entity_limit, const FetchOptions& options) {
  if (entity_limit < 1) throw ContractError("entity_limit must be at least 1");
  if (domain_type.empty()) throw ContractError("domain_type must be non-empty");
  const Endpoint ep = split_endpoint(endpoint);

  httplib::Client client(ep.origin);
  client.set_connection_timeout(options.timeout_seconds, 0);
  client.set_read_timeout(options.timeout_seconds, 0);
  client.set_follow_location(true);

  const httplib::Headers headers = {{"Accept", "application/sparql-results+json"},
                                    {"User-Agent", options.user_agent}};
  const httplib::Params params = {{"query", entity_query(domain_type, entity_limit)},
                                  {"format", "json"}};
  auto res = client.Get(ep.path, params, headers);
  if (!res) {
    throw RetryableError(fmt::format("request to {} failed: {}", endpoint,
                                     httplib::to_string(res.error())));
  }
  if (res->status < 200 || res->status >= 300)
    throw StatusError(res->status, "endpoint " + endpoint + " rejected the query");

  auto entities = parse_entity_results(res->body, domain_type, entity_limit);
  if (!options.cache_path.empty()) write_entities(entities, options.cache_path);

  KnowledgeSlice slice;
  slice.entities = std::move(entities);
  slice.domains = {domain_type};
  return slice;
}

}  // namespace squit
