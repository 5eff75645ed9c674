#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "semnav/labels.hpp"
#include "semnav/lru_ttl_cache.hpp"
#include "semnav/relevance.hpp"

using namespace semnav;

namespace {

std::shared_ptr<MockBackend> builtin_mock() {
  return std::make_shared<MockBackend>(CooccurrenceTable::builtin(), BandTable{}, default_aliases());
}

struct ManualClock {
  double now = 0.0;
  Clock fn() {
    return [this] { return now; };
  }
};

constexpr double kDay = 24.0 * 3600.0;

}  // namespace

TEST(Bands, DefaultsAndMidpoints) {
  const BandTable b;
  EXPECT_NO_THROW(b.validate());
  EXPECT_DOUBLE_EQ(b.value(RelevanceBand::SameSceneStrong), 0.875);
  EXPECT_DOUBLE_EQ(b.value(RelevanceBand::SceneRelated), 0.625);
  EXPECT_DOUBLE_EQ(b.value(RelevanceBand::WeaklyRelated), 0.35);
  EXPECT_DOUBLE_EQ(b.value(RelevanceBand::Unrelated), 0.1);
  EXPECT_TRUE(b.contains(RelevanceBand::SameSceneStrong, 1.0));
  EXPECT_FALSE(b.contains(RelevanceBand::SceneRelated, 0.75));
  EXPECT_TRUE(b.contains(RelevanceBand::Unrelated, 0.0));
}

TEST(Bands, RejectsOverlapAndNonZeroFloor) {
  EXPECT_THROW(BandTable({BandRange{0.7, 1.0}, {0.5, 0.8}, {0.2, 0.5}, {0.0, 0.2}}).validate(), std::invalid_argument);
  EXPECT_THROW(BandTable({BandRange{0.75, 1.0}, {0.5, 0.75}, {0.2, 0.5}, {0.1, 0.2}}).validate(), std::invalid_argument);
}

TEST(MockParse, Examples) {
  auto m = builtin_mock();
  EXPECT_EQ(m->parse("Help me find the fire_extinguisher"), "fire_extinguisher");
  EXPECT_EQ(m->parse("I want to find a table"), "table");
  EXPECT_EQ(m->parse("Where is the fire extinguisher?"), "fire_extinguisher");
  EXPECT_EQ(m->parse("Please go to the fridge"), "refrigerator");
  EXPECT_EQ(m->parse("Find the office chair"), "office_chair");  // longest phrase wins over "chair"
  EXPECT_THROW(m->parse("asdf qwerty"), ParseFailure);
}

TEST(MockScore, Examples) {
  auto m = builtin_mock();
  const BandTable b;
  EXPECT_DOUBLE_EQ(m->score({"keyboard"}, "monitor").at("keyboard"), b.value(RelevanceBand::SameSceneStrong));
  EXPECT_DOUBLE_EQ(m->score({"tree"}, "bed").at("tree"), b.value(RelevanceBand::Unrelated));
}

TEST(MockScore, EveryPairMatchesTableBandAndRespectsMonotonicity) {
  const auto table = CooccurrenceTable::builtin();
  const BandTable bands;
  MockBackend m(table, bands);
  const std::vector<std::string> vocab(table.vocabulary().begin(), table.vocabulary().end());
  for (const auto& target : vocab) {
    const auto s = m.score(vocab, target);
    for (const auto& a : vocab) {
      if (a == target) continue;
      const auto band = table.band(a, target);
      EXPECT_TRUE(bands.contains(band, s.at(a))) << a << " -> " << target;
      EXPECT_DOUBLE_EQ(s.at(a), bands.value(band));
      for (const auto& c : vocab) {
        if (c == target) continue;
        if (static_cast<int>(table.band(a, target)) < static_cast<int>(table.band(c, target))) {
          EXPECT_GT(s.at(a), s.at(c));
        }
      }
    }
  }
}

TEST(CooccurrenceTable, AllUnrelatedSharesVocabulary) {
  const auto a = CooccurrenceTable::all_unrelated();
  EXPECT_EQ(a.vocabulary(), CooccurrenceTable::builtin().vocabulary());
  EXPECT_EQ(a.band("keyboard", "monitor"), RelevanceBand::Unrelated);
}

TEST(CooccurrenceTable, FromJson) {
  const auto t = CooccurrenceTable::from_json(
      R"({"pairs":[{"label":"cone","target":"cup","band":"scene_related"}],"vocabulary":["spoon"]})");
  EXPECT_EQ(t.band("cone", "cup"), RelevanceBand::SceneRelated);
  EXPECT_EQ(t.band("cup", "cone"), RelevanceBand::Unrelated);  // directional
  EXPECT_TRUE(t.vocabulary().count("spoon"));
}

TEST(Sanitize, Examples) {
  EXPECT_EQ(sanitize_labels({"Chair", "chair "}), (std::vector<std::string>{"chair"}));
  EXPECT_TRUE(sanitize_labels({"???", ""}).empty());
  EXPECT_EQ(sanitize_labels({"wall", "chair"}, {"wall"}), (std::vector<std::string>{"chair"}));
  EXPECT_TRUE(sanitize_labels({"123", " - ", "\t"}).empty());
}

TEST(Cache, LruOrder) {
  LruTtlCache<std::string, int> c(2, kDay);
  c.put("A", 1, 0);
  c.put("B", 2, 0);
  EXPECT_TRUE(c.get("A", 0));
  c.put("C", 3, 0);
  EXPECT_FALSE(c.get("B", 0));
  EXPECT_TRUE(c.get("A", 0));
  EXPECT_TRUE(c.get("C", 0));
}

TEST(Cache, TtlBoundary) {
  LruTtlCache<std::string, int> c(4, kDay);
  c.put("A", 7, 0);
  EXPECT_EQ(c.get("A", 1.0), 7);
  EXPECT_EQ(c.get("A", kDay), 7);  // exactly 24 h: still fresh
  EXPECT_FALSE(c.get("A", kDay + 1.0));
  EXPECT_EQ(c.size(), 0u);  // purged
}

TEST(Cache, RejectsBadParameters) {
  using C = LruTtlCache<int, int>;
  EXPECT_THROW(C(0, 1.0), std::invalid_argument);
  EXPECT_THROW(C(1, 0.0), std::invalid_argument);
}

TEST(Engine, TargetScoresOneAndCacheIsTransparent) {
  ManualClock clock;
  RelevanceEngine cold(nullptr, builtin_mock(), {}, clock.fn());
  RelevanceEngine warm(nullptr, builtin_mock(), {}, clock.fn());
  const std::vector<std::string> labels{"keyboard", "bed", "Monitor", "tree"};
  const auto first = warm.score(labels, "monitor");
  const auto again = warm.score(labels, "monitor");
  EXPECT_EQ(first, again);
  EXPECT_EQ(first, cold.score(labels, "monitor"));
  EXPECT_DOUBLE_EQ(first.at("monitor"), 1.0);
  EXPECT_EQ(warm.cache_size(), 3u);
}

namespace {

// Counts calls and can be told to fail.
class ScriptedBackend final : public RelevanceBackend {
 public:
  std::atomic<int>* calls;
  bool fail = false;
  double value = 0.4;
  explicit ScriptedBackend(std::atomic<int>* c) : calls(c) {}
  std::string name() const override { return "scripted"; }
  std::string parse(std::string_view) override {
    ++*calls;
    if (fail) throw BackendError("down");
    return "mug";
  }
  std::map<std::string, double> score(const std::vector<std::string>& labels, const std::string&) override {
    ++*calls;
    if (fail) throw BackendError("down");
    std::map<std::string, double> out;
    for (const auto& l : labels) out[l] = value;
    return out;
  }
};

}  // namespace

TEST(Engine, CacheExpiresAfterTtl) {
  ManualClock clock;
  std::atomic<int> calls = 0;
  RelevanceEngine e(std::make_unique<ScriptedBackend>(&calls), builtin_mock(), {}, clock.fn());
  e.score({"cup"}, "mug");
  clock.now = kDay;
  e.score({"cup"}, "mug");
  EXPECT_EQ(calls, 1);
  clock.now = kDay + 1.0;
  e.score({"cup"}, "mug");
  EXPECT_EQ(calls, 2);
}

TEST(Engine, BackendFailureFallsBackToMockAndRecordsEvent) {
  ManualClock clock;
  std::atomic<int> calls = 0;
  auto backend = std::make_unique<ScriptedBackend>(&calls);
  backend->fail = true;
  RelevanceEngine e(std::move(backend), builtin_mock(), {}, clock.fn());
  const auto s = e.score({"keyboard"}, "monitor");
  EXPECT_DOUBLE_EQ(s.at("keyboard"), BandTable{}.value(RelevanceBand::SameSceneStrong));
  EXPECT_EQ(e.parse_instruction("Help me find the monitor"), "monitor");
  const auto ev = e.degradation_events();
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].operation, "score");
  EXPECT_EQ(ev[1].operation, "parse");
}

TEST(Engine, OutOfRangeBackendScoreIsAFormatViolation) {
  ManualClock clock;
  std::atomic<int> calls = 0;
  auto backend = std::make_unique<ScriptedBackend>(&calls);
  backend->value = 7.0;
  RelevanceEngine e(std::move(backend), builtin_mock(), {}, clock.fn());
  EXPECT_DOUBLE_EQ(e.score({"tree"}, "bed").at("tree"), BandTable{}.value(RelevanceBand::Unrelated));
  EXPECT_EQ(e.degradation_events().size(), 1u);
}

TEST(Templates, RenderAndIds) {
  EXPECT_EQ(render_template("find {{a}} near {{b}} {{c}}", {{"a", "cup"}, {"b", "sink"}}), "find cup near sink {{c}}");
  EXPECT_EQ(template_id(PromptTemplate::ParseInstruction), "parse_instruction.v1");
  EXPECT_NE(template_text(PromptTemplate::RelevanceEval).find("{{target}}"), std::string_view::npos);
}

// The remote backend against a local server speaking the documented contract.
class RemoteFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/llm", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      last_auth_ = req.get_header_value("Authorization");
      last_temperature_ = body.at("temperature").get<double>();
      if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
      nlohmann::json reply;
      if (body.at("template_id") == "parse_instruction.v1") {
        const std::string text = body.at("variables").at("instruction");
        reply["answer"] = text.find("kettle") != std::string::npos ? "Kettle" : "none";
      } else {
        reply["answer"] = "";
        for (const auto& l : body.at("variables").at("labels")) reply["scores"][l.get<std::string>()] = 0.55;
      }
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  RemoteConfig config() const {
    RemoteConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/llm";
    c.api_key = "k";
    c.temperature = 0.01;
    c.timeout_seconds = 0.3;
    return c;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int delay_ms_ = 0;
  std::string last_auth_;
  double last_temperature_ = -1.0;
};

TEST_F(RemoteFixture, ParseAndScore) {
  RemoteBackend r(config());
  EXPECT_EQ(r.parse("bring me the kettle"), "kettle");
  EXPECT_THROW(r.parse("asdf qwerty"), ParseFailure);
  EXPECT_EQ(r.score({"cup", "sink"}, "kettle"), (std::map<std::string, double>{{"cup", 0.55}, {"sink", 0.55}}));
  EXPECT_EQ(last_auth_, "Bearer k");
  EXPECT_DOUBLE_EQ(last_temperature_, 0.01);
}

TEST_F(RemoteFixture, TimeoutDegradesToMock) {
  delay_ms_ = 1000;
  ManualClock clock;
  RelevanceEngine e(std::make_unique<RemoteBackend>(config()), builtin_mock(), {}, clock.fn());
  EXPECT_DOUBLE_EQ(e.score({"keyboard"}, "monitor").at("keyboard"), 0.875);
  ASSERT_EQ(e.degradation_events().size(), 1u);
  EXPECT_EQ(e.degradation_events()[0].operation, "score");
}

TEST(Remote, RejectsNonHttpEndpoint) {
  RemoteConfig c;
  c.endpoint = "https://example.invalid/x";
  EXPECT_THROW(RemoteBackend{c}, BackendError);
}
