#include <cstdio>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "absatag/checkpoint.hpp"
#include "absatag/training.hpp"
#include "helpers.hpp"

using namespace absatag;
using namespace absatag::testing;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<Sentence> corpus() {
  std::vector<Sentence> out;
  Sentence a = make_sentence({"nice", "battery", "but", "poor", "screen"});
  a.spans = {span_over(a, 1, 1, Polarity::Positive),
             span_over(a, 4, 4, Polarity::Negative)};
  out.push_back(a);
  return out;
}

}  // namespace

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip restores config, vocab and predictions") {
    const std::vector<Sentence> data = corpus();
    ModelConfig mc;
    mc.architecture = Architecture::ARNN;
    mc.hidden_size = 6;
    mc.window_radius = 1;
    mc.scheme = SchemeMode::AESC;
    mc.use_features = true;
    mc.feature_dim = 14;
    Rng rng(60);
    Model model(mc, EmbeddingTable::random(data, 5, rng), rng);
    const std::string path = temp_path("absatag_ckpt_test.bin");
    save_checkpoint(path, model);

    Model restored = load_checkpoint(path);
    CHECK(restored.config().architecture == Architecture::ARNN);
    CHECK(restored.config().hidden_size == 6);
    CHECK(restored.config().window_radius == 1);
    CHECK(restored.config().scheme == SchemeMode::AESC);
    CHECK(restored.config().use_features);
    CHECK(restored.vocab() == model.vocab());
    REQUIRE(restored.features() != nullptr);
    CHECK(restored.features()->dim() == 14);

    const std::vector<int> before = model.predict(data[0]);
    const std::vector<int> after = restored.predict(data[0]);
    CHECK(before == after);

    // weights match bit for bit
    Model& m = model;
    std::vector<Parameter*> orig = m.all_parameters();
    std::vector<Parameter*> back = restored.all_parameters();
    REQUIRE(orig.size() == back.size());
    for (std::size_t i = 0; i < orig.size(); ++i) {
      CHECK(orig[i]->name == back[i]->name);
      CHECK(orig[i]->value.data == back[i]->value.data);
    }
    std::remove(path.c_str());
  }

  TEST_CASE("digest is stable and content sensitive") {
    const std::vector<Sentence> data = corpus();
    Model model = small_model(Architecture::RNN, SchemeMode::AE, data, 61, 4, 0);
    const std::string p1 = temp_path("absatag_ckpt_a.bin");
    const std::string p2 = temp_path("absatag_ckpt_b.bin");
    save_checkpoint(p1, model);
    save_checkpoint(p2, model);
    CHECK(checkpoint_digest(p1) == checkpoint_digest(p2));
    model.embedding().value.data[0] += 1.0;
    save_checkpoint(p2, model);
    CHECK(checkpoint_digest(p1) != checkpoint_digest(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
  }

  TEST_CASE("corrupt files are rejected") {
    const std::string path = temp_path("absatag_ckpt_bad.bin");
    std::ofstream(path) << "not a checkpoint";
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/nope.bin"), std::runtime_error);
    std::remove(path.c_str());
  }
}
