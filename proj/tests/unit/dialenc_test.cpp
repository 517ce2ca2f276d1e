#include <gtest/gtest.h>

#include "negograph/dialenc.hpp"
#include "negograph/optim.hpp"
#include "support.hpp"

using namespace negograph;
using nd::Tape;
using nd::Tensor;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, nd::Xoshiro256& rng) {
  Tensor t(r, c);
  for (auto& v : t.values()) v = 2.0 * rng.uniform() - 1.0;
  return t;
}

}  // namespace

TEST(UtteranceEncoder, SingleTokenIsLinearOfItsEmbedding) {
  nd::Xoshiro256 rng(1);
  nd::ParameterStore store;
  auto& emb = store.add_normal("emb", 10, 4, 0.5, rng);
  UtteranceEncoder enc(store, "utt", emb, 3, rng);
  store.get("utt.proj.b").value = random_tensor(1, 3, rng);
  Tape tape;
  const std::size_t ids[] = {6};
  const Tensor e = enc.encode(tape, ids, "d", 0).value();
  const auto& w = store.get("utt.proj.w").value;
  const auto& b = store.get("utt.proj.b").value;
  for (std::size_t c = 0; c < 3; ++c) {
    double x = b(0, c);
    for (std::size_t k = 0; k < 4; ++k) x += emb.value(6, k) * w(k, c);
    EXPECT_NEAR(e(0, c), x, 1e-14);
  }
}

TEST(UtteranceEncoder, DuplicatedSequenceHasTheSameMean) {
  nd::Xoshiro256 rng(2);
  nd::ParameterStore store;
  auto& emb = store.add_normal("emb", 10, 4, 0.5, rng);
  UtteranceEncoder enc(store, "utt", emb, 3, rng);
  Tape tape;
  const std::size_t once[] = {3, 5, 8};
  const std::size_t twice[] = {3, 5, 8, 3, 5, 8};
  const Tensor a = enc.encode(tape, once, "d", 0).value();
  const Tensor b = enc.encode(tape, twice, "d", 0).value();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
}

TEST(UtteranceEncoder, GradientReachesWordEmbeddings) {
  nd::Xoshiro256 rng(3);
  nd::ParameterStore store;
  auto& emb = store.add_normal("emb", 6, 3, 0.5, rng);
  UtteranceEncoder enc(store, "utt", emb, 2, rng);
  const std::size_t ids[] = {1, 4, 4};
  auto f = [&](Tape& t) {
    auto e = enc.encode(t, ids, "d", 0);
    return nd::sum_all(nd::mul(e, e));
  };
  EXPECT_LT(nd::grad_check(f, store).max_relative_error, 1e-6);
}

TEST(UtteranceEncoder, ExternalLookupIsConstant) {
  EmbeddingTable table(3);
  table.put("d1", 0, {1.0f, 2.0f, 3.0f});
  UtteranceEncoder enc(&table);
  EXPECT_EQ(enc.mode(), UtteranceMode::external);
  Tape tape;
  const std::size_t ids[] = {9};
  const auto v = enc.encode(tape, ids, "d1", 0);
  EXPECT_EQ(v.value(), Tensor::from_rows({{1, 2, 3}}));
  EXPECT_FALSE(tape.requires_grad(v.id));
  EXPECT_THROW(enc.encode(tape, ids, "d1", 1), LookupError);
  EXPECT_THROW(enc.encode(tape, ids, "d2", 0), LookupError);
}

TEST(EmbeddingTable, FileRoundTrip) {
  negograph::testing::TempDir dir;
  EmbeddingTable table(4);
  nd::Xoshiro256 rng(4);
  for (int d = 0; d < 3; ++d)
    for (std::size_t t = 0; t < 5; ++t) {
      std::vector<float> v(4);
      for (auto& x : v) x = static_cast<float>(rng.uniform());
      table.put("dialogue-" + std::to_string(d), t, v);
    }
  table.save(dir / "emb.bin");
  const auto back = EmbeddingTable::load(dir / "emb.bin");
  EXPECT_EQ(back, table);
  EXPECT_EQ(back.size(), 15u);
  EXPECT_THROW(table.put("x", 0, {1.0f}), nd::ShapeError);
}

TEST(EmbeddingTable, RejectsForeignFiles) {
  negograph::testing::TempDir dir;
  {
    std::ofstream out(dir / "bad.bin");
    out << "not an embedding file";
  }
  EXPECT_THROW(EmbeddingTable::load(dir / "bad.bin"), std::runtime_error);
}

TEST(ContextEncoder, IncrementalMatchesBatch) {
  nd::Xoshiro256 rng(5);
  nd::ParameterStore store;
  ContextEncoder ctx(store, "ctx", 4, 5, rng);
  std::vector<Tensor> inputs;
  for (int t = 0; t < 7; ++t) inputs.push_back(random_tensor(1, 4, rng));

  Tape tape;
  std::vector<nd::Var> vars;
  for (const auto& x : inputs) vars.push_back(tape.constant(x));
  const auto states = ctx.encode(tape, vars);
  ASSERT_EQ(states.size(), 7u);

  Tensor h = ctx.initial_state();
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    h = ctx.step(h, inputs[t]);
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(h[i], states[t].value()[i], 1e-12);
  }
}

TEST(ContextEncoder, ZeroWeightsDecayToZero) {
  nd::Xoshiro256 rng(6);
  nd::ParameterStore store;
  ContextEncoder ctx(store, "ctx", 3, 4, rng);
  for (auto& p : store) p.value.fill(0.0);
  Tape tape;
  std::vector<nd::Var> vars;
  for (int t = 0; t < 4; ++t) vars.push_back(tape.constant(random_tensor(1, 3, rng)));
  for (const auto& s : ctx.encode(tape, vars)) EXPECT_EQ(s.value().max_abs(), 0.0);
}

TEST(ContextEncoder, EmptySequenceIsAnError) {
  nd::Xoshiro256 rng(7);
  nd::ParameterStore store;
  ContextEncoder ctx(store, "ctx", 3, 4, rng);
  Tape tape;
  EXPECT_THROW(ctx.encode(tape, {}), std::invalid_argument);
}
