#include <cstdlib>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "semnav/relevance.hpp"

namespace semnav {

namespace {

struct Endpoint {
  std::string host;
  int port = 80;
  std::string path = "/";
};

Endpoint parse_endpoint(const std::string& url) {
  constexpr std::string_view scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw BackendError("only plain http:// endpoints are supported: '" + url + "'");
  }
  Endpoint ep;
  std::string rest = url.substr(scheme.size());
  const std::size_t slash = rest.find('/');
  if (slash != std::string::npos) {
    ep.path = rest.substr(slash);
    rest = rest.substr(0, slash);
  }
  const std::size_t colon = rest.rfind(':');
  if (colon != std::string::npos) {
    try {
      ep.port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw BackendError("bad port in endpoint '" + url + "'");
    }
    rest = rest.substr(0, colon);
  }
  if (rest.empty()) {
    throw BackendError("missing host in endpoint '" + url + "'");
  }
  ep.host = rest;
  return ep;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

}  // namespace

std::optional<RemoteConfig> RemoteConfig::from_env() {
  const char* endpoint = std::getenv("SEMNAV_LLM_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0') {
    return std::nullopt;
  }
  RemoteConfig cfg;
  cfg.endpoint = endpoint;
  if (const char* key = std::getenv("SEMNAV_LLM_API_KEY")) {
    cfg.api_key = key;
  }
  if (const char* t = std::getenv("SEMNAV_LLM_TIMEOUT_S")) {
    cfg.timeout_seconds = std::strtod(t, nullptr);
    if (!(cfg.timeout_seconds > 0.0)) cfg.timeout_seconds = 10.0;
  }
  return cfg;
}

struct RemoteBackend::Impl {
  Endpoint endpoint;

  nlohmann::json post(const RemoteConfig& cfg, const nlohmann::json& body) const {
    httplib::Client client(endpoint.host, endpoint.port);
    const auto secs = static_cast<time_t>(cfg.timeout_seconds);
    const auto usecs = static_cast<time_t>((cfg.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!cfg.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + cfg.api_key);
    }
    auto res = client.Post(endpoint.path, headers, body.dump(), "application/json");
    if (!res) {
      throw BackendError("request to " + endpoint.host + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw BackendError("endpoint returned HTTP " + std::to_string(res->status));
    }
    try {
      auto reply = nlohmann::json::parse(res->body);
      if (!reply.is_object()) throw BackendError("reply is not a JSON object");
      return reply;
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("reply is not valid JSON: ") + e.what());
    }
  }
};

RemoteBackend::RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
  impl_->endpoint = parse_endpoint(cfg_.endpoint);
}

RemoteBackend::~RemoteBackend() = default;

std::string RemoteBackend::parse(std::string_view instruction) {
  const std::string vocabulary = join(cfg_.vocabulary);
  const std::map<std::string, std::string> vars{{"instruction", std::string(instruction)},
                                                {"vocabulary", vocabulary}};
  nlohmann::json body{
      {"template_id", template_id(PromptTemplate::ParseInstruction)},
      {"variables",
       {{"instruction", std::string(instruction)},
        {"vocabulary", vocabulary},
        {"prompt", render_template(template_text(PromptTemplate::ParseInstruction), vars)}}},
      {"temperature", cfg_.temperature}};
  const auto reply = impl_->post(cfg_, body);
  const auto it = reply.find("answer");
  if (it == reply.end() || !it->is_string()) {
    throw BackendError("reply has no string 'answer'");
  }
  const auto label = LabelSanitizer{}.sanitize(it->get<std::string>());
  if (!label || *label == "none") {
    throw ParseFailure("endpoint could not resolve an object in: \"" + std::string(instruction) + "\"");
  }
  return *label;
}

std::map<std::string, double> RemoteBackend::score(const std::vector<std::string>& labels,
                                                   const std::string& target) {
  const std::string bands = describe_bands(cfg_.bands);
  const std::map<std::string, std::string> vars{{"target", target}, {"labels", join(labels)}, {"bands", bands}};
  nlohmann::json body{{"template_id", template_id(PromptTemplate::RelevanceEval)},
                      {"variables",
                       {{"target", target},
                        {"labels", labels},
                        {"bands", bands},
                        {"prompt", render_template(template_text(PromptTemplate::RelevanceEval), vars)}}},
                      {"temperature", cfg_.temperature}};
  const auto reply = impl_->post(cfg_, body);
  const auto it = reply.find("scores");
  if (it == reply.end() || !it->is_object()) {
    throw BackendError("reply has no 'scores' object");
  }
  std::map<std::string, double> out;
  for (const auto& [label, value] : it->items()) {
    if (!value.is_number()) {
      throw BackendError("score for '" + label + "' is not a number");
    }
    out[label] = value.get<double>();
  }
  return out;
}

}  // namespace semnav
