#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sgap/dataset.hpp"
#include "sgap/errors.hpp"

using namespace sgap;

namespace {

std::filesystem::path scratch(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Dataset toy() {
  Dataset ds;
  ds.graph = load_edge_list("0 1\n1 2\n", 3);
  ds.features = (Matrix(3, 2) << 0.1, -2.5, 1e-7, 3.0, 1.0 / 3.0, 42.0).finished();
  ds.labels = {0, 1, 1};
  ds.num_classes = 2;
  ds.splits = {{0}, {1}, {2}};
  return ds;
}

}  // namespace

TEST(Dataset, ToyRoundTripsBitwise) {
  const auto dir = scratch("sgap_ds_toy");
  const Dataset ds = toy();
  save_dataset(ds, dir);
  const Dataset back = load_dataset(dir);
  EXPECT_EQ(back.num_nodes(), 3u);
  EXPECT_EQ(back.graph, ds.graph);
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.num_classes, 2);
  EXPECT_EQ(back.splits.train, ds.splits.train);
  EXPECT_EQ(back.splits.val, ds.splits.val);
  EXPECT_EQ(back.splits.test, ds.splits.test);
  std::filesystem::remove_all(dir);
}

TEST(Dataset, OverlappingSplitsRejected) {
  const auto dir = scratch("sgap_ds_overlap");
  save_dataset(toy(), dir);
  std::ofstream(dir / "split.json") << R"({"train":[0,1],"val":[1],"test":[2]})";
  EXPECT_THROW(load_dataset(dir), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST(Dataset, MissingFileAndShapeMismatch) {
  const auto dir = scratch("sgap_ds_bad");
  save_dataset(toy(), dir);
  std::ofstream(dir / "labels.csv") << "0\n1\n1\n0\n";  // four labels, three feature rows
  EXPECT_THROW(load_dataset(dir), DimensionError);
  std::filesystem::remove(dir / "graph.tsv");
  EXPECT_THROW(load_dataset(dir), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST(Dataset, CsvAndBinaryFeaturesAgree) {
  SbmParams sp;
  sp.num_nodes = 50;
  sp.seed = 2;
  const Dataset ds = synth_sbm(sp);
  const auto dir = scratch("sgap_ds_formats");
  save_features_csv(ds.features, dir / "f.csv");
  save_features_binary(ds.features, dir / "f.bin");
  const Matrix csv = load_features_csv(dir / "f.csv");
  const Matrix bin = load_features_binary(dir / "f.bin");
  ASSERT_EQ(csv.rows(), bin.rows());
  ASSERT_EQ(csv.cols(), bin.cols());
  for (Eigen::Index i = 0; i < csv.size(); ++i) {
    // The binary file stores 32-bit reals: one float ulp of the value.
    const double ulp = std::abs(std::nextafter(static_cast<float>(csv.data()[i]), INFINITY) -
                                static_cast<float>(csv.data()[i]));
    EXPECT_LE(std::abs(csv.data()[i] - bin.data()[i]), ulp);
  }
  {
    std::ifstream in(dir / "f.bin", std::ios::binary);
    char magic[7];
    in.read(magic, 7);
    EXPECT_EQ(std::string(magic, 7), "PASCAF1");
  }
  std::filesystem::remove_all(dir);
}

TEST(Sbm, DisconnectedWithoutCrossEdges) {
  SbmParams sp;
  sp.num_nodes = 120;
  sp.blocks = 3;
  sp.p_in = 0.5;
  sp.p_out = 0.0;
  EXPECT_EQ(connected_components(synth_sbm(sp).graph), 3u);
}

TEST(Sbm, IntraBlockEdgesMatchBinomial) {
  SbmParams sp;
  sp.num_nodes = 400;
  sp.blocks = 2;
  sp.p_in = 0.1;
  sp.p_out = 0.01;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    sp.seed = seed;
    const Dataset ds = synth_sbm(sp);
    std::size_t intra = 0;
    for (std::size_t v = 0; v < ds.num_nodes(); ++v)
      for (auto u : ds.graph.neighbors(v)) intra += (u > v && ds.labels[u] == ds.labels[v]);
    const double nb = 200.0;
    const double trials = sp.blocks * nb * (nb - 1) / 2.0;
    const double mean = trials * sp.p_in;
    const double sd = std::sqrt(trials * sp.p_in * (1 - sp.p_in));
    EXPECT_LE(std::abs(static_cast<double>(intra) - mean), 3 * sd);
  }
}

TEST(Sbm, SeedsDifferAndRepeat) {
  SbmParams sp;
  sp.seed = 1;
  const Dataset a = synth_sbm(sp);
  const Dataset b = synth_sbm(sp);
  sp.seed = 2;
  const Dataset c = synth_sbm(sp);
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.features, b.features);
  EXPECT_NE(a.graph, c.graph);
}

TEST(Sbm, SplitProportionsAndValidation) {
  SbmParams sp;
  sp.num_nodes = 100;
  const Dataset ds = synth_sbm(sp);
  EXPECT_EQ(ds.splits.train.size(), 60u);
  EXPECT_EQ(ds.splits.val.size(), 20u);
  EXPECT_EQ(ds.splits.test.size(), 20u);
  sp.p_in = 0.01;
  sp.p_out = 0.5;
  EXPECT_THROW(synth_sbm(sp), ValidationError);
}
