/* Copyright 2026 The qnet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Checks against the committed LeNet-5 fixture bundle.

#include <gtest/gtest.h>

#include <cmath>

#include "qnet/calibrator.h"
#include "qnet/io.h"
#include "qnet/search.h"

namespace qnet {
namespace {

class FixtureTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const std::filesystem::path root = QNET_FIXTURE_DIR;
    net_ = new NetworkGraph(
        load_model(root / "lenet5/lenet5.json", root / "lenet5/lenet5.cnnw"));
    test_ = new Dataset(load_mnist(root / "mnist/t10k-images-idx3-ubyte",
                                   root / "mnist/t10k-labels-idx1-ubyte"));
    calib_ = new Dataset(load_mnist(root / "mnist/calib-images-idx3-ubyte",
                                    root / "mnist/calib-labels-idx1-ubyte"));
  }
  static void TearDownTestSuite() {
    delete net_;
    delete test_;
    delete calib_;
  }

  static NetworkGraph* net_;
  static Dataset* test_;
  static Dataset* calib_;
};

NetworkGraph* FixtureTest::net_ = nullptr;
Dataset* FixtureTest::test_ = nullptr;
Dataset* FixtureTest::calib_ = nullptr;

TEST_F(FixtureTest, FloatLogitsMatchTrainingFramework) {
  const std::filesystem::path root = QNET_FIXTURE_DIR;
  const auto tensors = read_weights(root / "lenet5/reference_logits.cnnw");
  ASSERT_EQ(tensors.size(), 1u);
  const Tensor& reference = tensors[0].tensor;
  ASSERT_EQ(reference.shape(), Shape({100, 10}));
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const Tensor logits =
        forward(*net_, (*test_)[i].image, QuantConfig::Float()).logits;
    for (std::size_t c = 0; c < 10; ++c) {
      worst = std::max(worst, std::fabs(static_cast<double>(logits[c]) -
                                        reference[i * 10 + c]));
    }
  }
  EXPECT_LE(worst, 1e-4);
  RecordProperty("max_abs_logit_difference", std::to_string(worst));
}

TEST_F(FixtureTest, FloatAccuracyNearNinetyNinePercent) {
  const EvalResult r =
      evaluate_accuracy(*net_, *test_, QuantConfig::Float(), {1, 0, 0});
  EXPECT_EQ(r.evaluated, 10000u);
  EXPECT_GE(r.accuracy, 0.985);
  EXPECT_LE(r.accuracy, 0.995);
  RecordProperty("float_top1", std::to_string(r.accuracy));
}

TEST_F(FixtureTest, CalibrationScalesArePowersOfTwoCoveringMaxima) {
  const CalibrationProfile profile = calibrate(*net_, *calib_, 0);
  EXPECT_EQ(profile.samples, 1000u);
  const ScaleSet scales = derive_scales(profile, ScalePolicy::kPerLayer);
  ASSERT_EQ(scales.layers.size(), 4u);
  // Layer 1 sees raw pixels in [0, 1].
  EXPECT_EQ(profile.layers[0].input_max_abs, 1.0);
  EXPECT_EQ(scales.layers[0].input_exponent, 0);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_GE(std::ldexp(1.0, scales.layers[k].weight_exponent),
              profile.layers[k].weight_max_abs);
    EXPECT_LT(std::ldexp(1.0, scales.layers[k].weight_exponent - 1),
              profile.layers[k].weight_max_abs);
  }
}

TEST_F(FixtureTest, SixteenBitsKeepsFullRelativeAccuracy) {
  const ScaleSet scales =
      derive_scales(calibrate(*net_, *calib_, 0), ScalePolicy::kPerLayer);
  const Dataset subset = select_subset(*test_, 1000, 1);
  AccuracyEvaluator evaluator(*net_, subset, EvalOptions{1, 0, 0});
  EXPECT_EQ(evaluator.evaluate(uniform_config(scales, 16)).relative_accuracy,
            1.0);
}

TEST(SubsetTest, SeededSelectionIsStableAndSorted) {
  Dataset data;
  for (int i = 0; i < 50; ++i) data.push_back({Tensor({1}, {float(i)}), 0});
  const Dataset a = select_subset(data, 10, 7);
  const Dataset b = select_subset(data, 10, 7);
  const Dataset c = select_subset(data, 10, 8);
  ASSERT_EQ(a.size(), 10u);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image, b[i].image);
    differs |= !(a[i].image == c[i].image);
    if (i > 0) EXPECT_LT(a[i - 1].image[0], a[i].image[0]);
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(select_subset(data, 0, 7).size(), 50u);
  EXPECT_EQ(select_subset(data, 500, 7).size(), 50u);
}

}  // namespace
}  // namespace qnet
