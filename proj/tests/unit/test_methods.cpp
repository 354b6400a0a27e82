#include <gtest/gtest.h>

#include <sstream>

#include "embprobe/generators.hpp"
#include "embprobe/methods.hpp"

using namespace embprobe;

TEST(Embedding, TextRoundTripIsLossless) {
  Embedding e;
  e.matrix.resize(2, 3);
  e.matrix << 0.1, -1e-300, 3.0 / 7.0, 1e10, 0, -2.5;
  e.vertices = {"x", "y"};
  e.method = MethodTag::node2vec_s;
  std::stringstream s;
  write_embedding(e, s);
  const Embedding back = read_embedding(s);
  EXPECT_EQ(back.matrix, e.matrix);
  EXPECT_EQ(back.vertices, e.vertices);
  EXPECT_EQ(back.method, MethodTag::node2vec_s);
  EXPECT_EQ(back.geometry, Geometry::euclidean);
}

TEST(Embedding, HeaderWithoutMethodTag) {
  std::istringstream in("1 2 poincare_polar\nv 0.5 1.0\n");
  const Embedding e = read_embedding(in);
  EXPECT_FALSE(e.method);
  EXPECT_EQ(e.geometry, Geometry::poincare_polar);
}

TEST(Embedding, MalformedFilesAreParseErrors) {
  for (const char* text : {"", "2 2\n", "1 2 curved\nv 1 2\n", "1 2 euclidean word2vec\nv 1 2\n",
                           "2 2 euclidean\nv 1 2\n", "1 2 euclidean\nv 1\n",
                           "1 2 euclidean\nv 1 x\n", "1 2 euclidean\nv 1 2 3\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_embedding(in), ParseError) << text;
  }
}

TEST(Methods, OverridesApplyAndValidate) {
  auto p = method_defaults(MethodTag::node2vec_h);
  apply_override(p, "epochs", "3");
  apply_override(p, "q", "0.25");
  apply_override(p, "mode", "exact_softmax");
  EXPECT_EQ(p.skipgram.train.epochs, 3u);
  EXPECT_EQ(p.skipgram.strategy.q, 0.25);
  EXPECT_EQ(p.skipgram.train.mode, SoftmaxMode::exact_softmax);
  EXPECT_THROW(apply_override(p, "epochs", "two"), InvalidArgument);
  EXPECT_THROW(apply_override(p, "epochs", "-1"), InvalidArgument);
  EXPECT_THROW(apply_override(p, "colour", "1"), InvalidArgument);

  auto dw = method_defaults(MethodTag::deepwalk);
  EXPECT_THROW(apply_override(dw, "p", "2"), InvalidArgument);
  auto poincare = method_defaults(MethodTag::poincare);
  EXPECT_THROW(apply_override(poincare, "dim", "3"), InvalidArgument);
  auto sdne = method_defaults(MethodTag::sdne);
  apply_override(sdne, "alpha", "5");
  EXPECT_EQ(sdne.sdne.alpha, 5.0);
  EXPECT_THROW(apply_override(sdne, "window", "3"), InvalidArgument);
}

TEST(Methods, DefaultsMatchDocumentedSettings) {
  const auto dw = method_defaults(MethodTag::deepwalk).skipgram;
  EXPECT_EQ(dw.train.dim, 128u);
  EXPECT_EQ(dw.walks_per_vertex, 10u);
  EXPECT_EQ(dw.walk_length, 80u);
  EXPECT_EQ(dw.train.window, 10u);
  EXPECT_EQ(dw.train.epochs, 15u);
  const auto h = method_defaults(MethodTag::node2vec_h).skipgram.strategy;
  EXPECT_EQ(h.p, 1.0);
  EXPECT_EQ(h.q, 0.5);
  const auto s = method_defaults(MethodTag::node2vec_s).skipgram.strategy;
  EXPECT_EQ(s.p, 0.5);
  EXPECT_EQ(s.q, 2.0);
  const auto sd = method_defaults(MethodTag::sdne).sdne;
  EXPECT_EQ(sd.alpha, 500.0);
  EXPECT_EQ(sd.beta, 10.0);
  EXPECT_EQ(sd.hidden, 256u);
}

TEST(Methods, RunMethodRecordsLosses) {
  const Graph g = generators::karate_club();
  auto p = method_defaults(MethodTag::sdne);
  apply_override(p, "epochs", "4");
  apply_override(p, "hidden", "16");
  apply_override(p, "dim", "8");
  const auto out = run_method(p, g, 1);
  EXPECT_EQ(out.embedding.dim(), 8u);
  ASSERT_EQ(out.training["epoch_loss"].size(), 4u);
  EXPECT_TRUE(out.training["epoch_loss"][0].contains("proximity"));

  auto q = method_defaults(MethodTag::poincare);
  apply_override(q, "epochs", "1");
  const auto polar = run_method(q, g, 1);
  EXPECT_EQ(polar.embedding.geometry, Geometry::poincare_polar);
  EXPECT_EQ(polar.training["epoch_loss"].size(), 1u);
  EXPECT_EQ(method_params_json(q)["geometry"], "poincare_polar");
}

TEST(Methods, NamesRoundTrip) {
  for (auto m : {MethodTag::deepwalk, MethodTag::node2vec_h, MethodTag::node2vec_s,
                 MethodTag::poincare, MethodTag::sdne})
    EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_FALSE(parse_method("line"));
}
