#include "semnav/relevance.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

namespace semnav {

namespace {

constexpr std::array<std::string_view, 4> kBandNames = {"same_scene_strong", "scene_related", "weakly_related",
                                                        "unrelated"};

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 2);
  out.push_back(' ');
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    out.push_back(std::isalnum(c) || ch == '_' ? static_cast<char>(std::tolower(c)) : ' ');
  }
  out.push_back(' ');
  return out;
}

}  // namespace

std::string_view to_string(RelevanceBand band) { return kBandNames[static_cast<std::size_t>(band)]; }

std::optional<RelevanceBand> band_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kBandNames.size(); ++i) {
    if (kBandNames[i] == name) {
      return static_cast<RelevanceBand>(i);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

BandTable::BandTable() : BandTable({BandRange{0.75, 1.0}, {0.5, 0.75}, {0.2, 0.5}, {0.0, 0.2}}) {}

BandTable::BandTable(std::array<BandRange, 4> ranges) : ranges_(ranges) { validate(); }

bool BandTable::contains(RelevanceBand band, double score) const {
  const BandRange& r = range(band);
  if (band == RelevanceBand::SameSceneStrong || r.lo == r.hi) {
    return score >= r.lo && score <= r.hi;
  }
  return score >= r.lo && score < r.hi;
}

void BandTable::validate() const {
  for (const auto& r : ranges_) {
    if (!(r.lo >= 0.0 && r.hi <= 1.0 && r.lo <= r.hi)) {
      throw std::invalid_argument("relevance band range must satisfy 0 <= lo <= hi <= 1");
    }
  }
  const auto& strong = range(RelevanceBand::SameSceneStrong);
  const auto& related = range(RelevanceBand::SceneRelated);
  const auto& weak = range(RelevanceBand::WeaklyRelated);
  const auto& unrelated = range(RelevanceBand::Unrelated);
  if (!(strong.lo >= related.hi && related.lo >= weak.hi && weak.lo >= unrelated.hi)) {
    throw std::invalid_argument("relevance bands must be non-overlapping and descending");
  }
  if (!(strong.hi > related.hi && related.hi > weak.hi && weak.hi > unrelated.hi)) {
    throw std::invalid_argument("relevance band upper bounds must strictly descend");
  }
  if (unrelated.lo != 0.0) {
    throw std::invalid_argument("the unrelated band must start at 0");
  }
}

// ---------------------------------------------------------------------------

const std::vector<SceneKit>& builtin_kits() {
  static const std::vector<SceneKit> kits = {
      {"office", {"monitor", "keyboard", "mouse", "desk", "office_chair", "printer", "laptop"}},
      {"bedroom", {"bed", "pillow", "nightstand", "wardrobe", "dresser", "alarm_clock"}},
      {"kitchen", {"refrigerator", "stove", "microwave", "sink", "kettle", "toaster"}},
      {"bathroom", {"toilet", "bathtub", "towel", "shower", "toothbrush"}},
      {"living_room", {"sofa", "tv_monitor", "coffee_table", "bookshelf", "armchair", "plant"}},
      {"dining_room", {"table", "chair", "cabinet", "vase", "plate"}},
      {"utility", {"fire_extinguisher", "washing_machine", "mop", "bucket", "toolbox"}},
      {"garden", {"tree", "bench", "flower_pot", "fence"}},
  };
  return kits;
}

void CooccurrenceTable::set(std::string label, std::string target, RelevanceBand band) {
  vocabulary_.insert(label);
  vocabulary_.insert(target);
  pairs_[{std::move(label), std::move(target)}] = band;
}

RelevanceBand CooccurrenceTable::band(const std::string& label, const std::string& target) const {
  const auto it = pairs_.find({label, target});
  return it == pairs_.end() ? RelevanceBand::Unrelated : it->second;
}

CooccurrenceTable CooccurrenceTable::builtin() {
  // Kit adjacency: {kit a, kit b, band}. Applied in both directions.
  struct Link {
    std::string_view a;
    std::string_view b;
    RelevanceBand band;
  };
  static constexpr Link links[] = {
      {"kitchen", "dining_room", RelevanceBand::SceneRelated},
      {"bedroom", "bathroom", RelevanceBand::SceneRelated},
      {"living_room", "dining_room", RelevanceBand::SceneRelated},
      {"office", "living_room", RelevanceBand::WeaklyRelated},
      {"office", "bedroom", RelevanceBand::WeaklyRelated},
      {"kitchen", "utility", RelevanceBand::WeaklyRelated},
      {"bathroom", "utility", RelevanceBand::WeaklyRelated},
      {"living_room", "bedroom", RelevanceBand::WeaklyRelated},
      {"garden", "utility", RelevanceBand::WeaklyRelated},
  };
  const auto& kits = builtin_kits();
  auto link_band = [&](std::string_view a, std::string_view b) -> std::optional<RelevanceBand> {
    if (a == b) return RelevanceBand::SameSceneStrong;
    for (const auto& l : links) {
      if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return l.band;
    }
    return std::nullopt;
  };
  CooccurrenceTable table;
  for (const auto& ka : kits) {
    for (const auto& kb : kits) {
      const auto band = link_band(ka.name, kb.name);
      for (const auto& label : ka.objects) {
        table.add_vocabulary(label);
        if (!band) continue;
        for (const auto& target : kb.objects) {
          if (label != target) table.set(label, target, *band);
        }
      }
    }
  }
  return table;
}

CooccurrenceTable CooccurrenceTable::all_unrelated() {
  CooccurrenceTable table;
  for (const auto& kit : builtin_kits()) {
    for (const auto& label : kit.objects) table.add_vocabulary(label);
  }
  return table;
}

CooccurrenceTable CooccurrenceTable::from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  CooccurrenceTable table;
  for (const auto& v : j.value("vocabulary", nlohmann::json::array())) {
    table.add_vocabulary(v.get<std::string>());
  }
  for (const auto& p : j.value("pairs", nlohmann::json::array())) {
    const auto band = band_from_string(p.at("band").get<std::string>());
    if (!band) {
      throw std::invalid_argument("unknown relevance band '" + p.at("band").get<std::string>() + "'");
    }
    table.set(p.at("label").get<std::string>(), p.at("target").get<std::string>(), *band);
  }
  return table;
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> default_aliases() {
  return {{"fridge", "refrigerator"}, {"couch", "sofa"},       {"tv", "tv_monitor"},
          {"television", "tv_monitor"}, {"computer screen", "monitor"}, {"extinguisher", "fire_extinguisher"},
          {"potted plant", "plant"},   {"dining table", "table"}, {"oven", "stove"}};
}

MockBackend::MockBackend(CooccurrenceTable table, BandTable bands, std::map<std::string, std::string> aliases)
    : table_(std::move(table)), bands_(bands) {
  for (const auto& label : table_.vocabulary()) {
    phrases_.emplace_back(label, label);
    std::string spaced = label;
    std::replace(spaced.begin(), spaced.end(), '_', ' ');
    if (spaced != label) phrases_.emplace_back(spaced, label);
  }
  for (auto& [alias, label] : aliases) {
    phrases_.emplace_back(alias, label);
  }
}

std::string MockBackend::parse(std::string_view instruction) {
  const std::string text = normalize_text(instruction);
  std::size_t best_len = 0;
  std::size_t best_pos = std::string::npos;
  std::string best;
  for (const auto& [phrase, label] : phrases_) {
    const std::string needle = " " + phrase + " ";
    const std::size_t pos = text.find(needle);
    if (pos == std::string::npos) continue;
    if (phrase.size() > best_len || (phrase.size() == best_len && pos < best_pos)) {
      best_len = phrase.size();
      best_pos = pos;
      best = label;
    }
  }
  if (best.empty()) {
    throw ParseFailure("no known object in instruction: \"" + std::string(instruction) + "\"");
  }
  return best;
}

std::map<std::string, double> MockBackend::score(const std::vector<std::string>& labels,
                                                 const std::string& target) {
  std::map<std::string, double> out;
  for (const auto& label : labels) {
    out[label] = label == target ? 1.0 : bands_.value(table_.band(label, target));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string render_template(std::string_view text, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    const std::size_t close = text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const std::string name(text.substr(open + 2, close - open - 2));
    if (auto it = vars.find(name); it != vars.end()) {
      out.append(it->second);
    } else {
      out.append(text.substr(open, close + 2 - open));
    }
    pos = close + 2;
  }
  return out;
}

std::string describe_bands(const BandTable& bands) {
  static constexpr std::array<std::string_view, 4> meaning = {
      "object typically found in the same scene as the target",
      "object found in a scene usually connected to the target's scene",
      "object with a weak, indirect association to the target",
      "object unrelated to the target's scene",
  };
  std::ostringstream out;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& r = bands.ranges()[i];
    out << "- " << kBandNames[i] << " [" << r.lo << ", " << r.hi << (i == 0 ? "]" : ")") << ": " << meaning[i]
        << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

RelevanceEngine::RelevanceEngine(std::unique_ptr<RelevanceBackend> primary, std::shared_ptr<MockBackend> fallback,
                                 EngineConfig cfg, Clock clock)
    : primary_(std::move(primary)),
      fallback_(std::move(fallback)),
      sanitizer_(cfg.stop_list),
      clock_(std::move(clock)),
      score_cache_(cfg.cache_capacity, cfg.cache_ttl_seconds),
      parse_cache_(cfg.cache_capacity, cfg.cache_ttl_seconds) {
  if (!fallback_) {
    throw std::invalid_argument("RelevanceEngine requires a mock fallback backend");
  }
  if (!clock_) {
    throw std::invalid_argument("RelevanceEngine requires a clock");
  }
}

std::string RelevanceEngine::parse_instruction(std::string_view text) {
  const std::string key(text);
  const double now = clock_();
  if (auto hit = parse_cache_.get(key, now)) {
    return *hit;
  }
  std::string label;
  if (primary_) {
    try {
      ++backend_calls_;
      label = primary_->parse(text);
    } catch (const BackendError& e) {
      std::lock_guard lock(events_mu_);
      events_.push_back({"parse", e.what()});
      label.clear();
    }
  }
  if (label.empty()) {
    label = fallback_->parse(text);
  }
  parse_cache_.put(key, label, now);
  return label;
}

std::map<std::string, double> RelevanceEngine::score(const std::vector<std::string>& labels,
                                                     const std::string& target) {
  const double now = clock_();
  std::map<std::string, double> out;
  std::vector<std::string> misses;
  for (const auto& label : sanitizer_.sanitize_all(labels)) {
    if (label == target) {
      out[label] = 1.0;
    } else if (auto hit = score_cache_.get({label, target}, now)) {
      out[label] = *hit;
    } else {
      misses.push_back(label);
    }
  }
  if (misses.empty()) {
    return out;
  }

  std::map<std::string, double> fresh;
  bool have = false;
  if (primary_) {
    try {
      ++backend_calls_;
      fresh = primary_->score(misses, target);
      for (const auto& label : misses) {
        const auto it = fresh.find(label);
        if (it == fresh.end() || !(it->second >= 0.0 && it->second <= 1.0)) {
          throw BackendError("score for '" + label + "' missing or outside [0, 1]");
        }
      }
      have = true;
    } catch (const BackendError& e) {
      std::lock_guard lock(events_mu_);
      events_.push_back({"score", e.what()});
    }
  }
  if (!have) {
    fresh = fallback_->score(misses, target);
  }
  for (const auto& label : misses) {
    const double value = fresh.at(label);
    score_cache_.put({label, target}, value, now);
    out[label] = value;
  }
  return out;
}

std::vector<DegradationEvent> RelevanceEngine::degradation_events() const {
  std::lock_guard lock(events_mu_);
  return events_;
}

}  // namespace semnav
