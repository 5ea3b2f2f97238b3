#include <algorithm>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "crowdcorrect/knowledge.hpp"

namespace crowdcorrect {

namespace {

struct Endpoint {
  std::string host;
  int port = 80;
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  static const std::regex kUrl(R"(^http://([^/:]+)(?::(\d+))?(/[^?#]*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::InvalidArgument, "unsupported endpoint: " + url);
  }
  Endpoint endpoint;
  endpoint.host = m[1].str();
  if (m[2].matched) endpoint.port = std::stoi(m[2].str());
  endpoint.path = m[3].matched && !m[3].str().empty() ? m[3].str() : "/";
  return endpoint;
}

}  // namespace

std::vector<Candidate> query_remote(const SourceDescriptor& source,
                                    std::string_view word) {
  auto it = source.config.find("endpoint");
  if (it == source.config.end()) {
    throw Error(ErrorCode::InvalidArgument,
                "remote source " + source.source_id + " has no endpoint");
  }
  const Endpoint endpoint = parse_endpoint(it->second);
  int timeout_ms = 2000;
  if (auto t = source.config.find("timeout_ms"); t != source.config.end()) {
    timeout_ms = std::stoi(t->second);
  }

  httplib::Client client(endpoint.host, endpoint.port);
  const auto timeout = std::chrono::milliseconds(timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const std::string target = endpoint.path + "?q=" + url_encode(word);
  auto response = client.Get(target);
  if (!response) {
    throw Error(ErrorCode::NetworkError,
                source.source_id + ": " + httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw Error(ErrorCode::BadResponse,
                source.source_id + ": HTTP " + std::to_string(response->status));
  }

  nlohmann::json body;
  try {
    body = nlohmann::json::parse(response->body);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorCode::BadResponse, source.source_id + ": body is not JSON");
  }
  if (!body.is_object() || !body.contains("candidates") ||
      !body["candidates"].is_array()) {
    throw Error(ErrorCode::BadResponse, source.source_id + ": missing candidates");
  }
  std::vector<Candidate> out;
  for (const auto& item : body["candidates"]) {
    if (!item.is_object() || !item.contains("replacement") ||
        !item["replacement"].is_string() || !item.contains("score") ||
        !item["score"].is_number()) {
      throw Error(ErrorCode::BadResponse, source.source_id + ": bad candidate");
    }
    std::string replacement = item["replacement"].get<std::string>();
    if (replacement.empty()) {
      throw Error(ErrorCode::BadResponse, source.source_id + ": empty replacement");
    }
    const double score = std::clamp(item["score"].get<double>(), 0.0, 1.0);
    out.push_back({std::move(replacement), score, source.source_id});
  }
  return out;
}

}  // namespace crowdcorrect
