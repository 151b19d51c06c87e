// Copyright 2026 The qgrade Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qgrade/metrics.hpp"

namespace qgrade {
namespace {

RingConfig ring(int L) {
  RingConfig c;
  c.L = L;
  return c;
}

TEST(FirstPeak, SkipsSmallRipples) {
  std::vector<double> v;
  for (int k = 0; k <= 400; ++k) {
    const double t = 0.1 * k;
    v.push_back(0.004 * std::sin(6.0 * t) * std::sin(6.0 * t) + std::exp(-(t - 20.0) * (t - 20.0) / 8.0));
  }
  EXPECT_NEAR(static_cast<double>(find_first_peak(v)), 200.0, 2.0);
}

TEST(FirstPeak, TakesEarliestOfTwoHumps) {
  std::vector<double> v;
  for (int k = 0; k <= 300; ++k) {
    const double t = 0.1 * k;
    v.push_back(0.7 * std::exp(-(t - 8.0) * (t - 8.0)) + std::exp(-(t - 22.0) * (t - 22.0)));
  }
  EXPECT_EQ(find_first_peak(v), 80u);
}

TEST(FirstPeak, RequiresClosedPeak) {
  EXPECT_THROW(find_first_peak(std::vector<double>{0.0, 1.0}), ProtocolError);
  EXPECT_THROW(find_first_peak(std::vector<double>{0.0, 0.1, 0.2, 0.3}), ProtocolError);
  EXPECT_THROW(find_first_peak(std::vector<double>{0.0, 0.0, 0.0}), ProtocolError);
}

TEST(Tmax, SmallRings) {
  EXPECT_EQ(find_tmax(ring(4)), 16);
  EXPECT_EQ(find_tmax(ring(6)), 21);
  EXPECT_EQ(find_tmax(ring(8)), 27);
  EXPECT_THROW(find_tmax(ring(2)), InputError);
}

TEST(Tmax, WithinBracketOfPrediction) {
  for (int L : {4, 6, 8}) {
    const double predicted = L / (4.0 * 0.1);
    const int t = find_tmax(ring(L));
    EXPECT_GE(t, 0.6 * predicted);
    EXPECT_LE(t, 1.8 * predicted);
  }
}

TEST(TrotterError, ZeroForIdenticalTraces) {
  const TracePair a{trotter_trace(ring(4), 16.0, 6, true), trotter_trace(ring(4), 16.0, 6, false)};
  EXPECT_DOUBLE_EQ(trotter_error(a, a, 6, 4), 0.0);
  const TracePair b{trotter_trace(ring(4), 17.0, 6, true), trotter_trace(ring(4), 17.0, 6, false)};
  EXPECT_THROW(trotter_error(a, b, 6, 4), InputError);
  EXPECT_THROW(trotter_error(a, a, 5, 4), InputError);
}

TEST(TrotterError, DoublingStepsReducesError) {
  const ExactPropagator exact(ring(4));
  for (int N : {6, 8, 12, 20}) {
    EXPECT_LT(trotter_error(exact, 16.0, 2 * N), trotter_error(exact, 16.0, N)) << "N=" << N;
  }
}

TEST(Nopt, SmallRings) {
  for (int L : {4, 6, 8}) {
    const int t = find_tmax(ring(L));
    const NoptResult r = find_nopt(ring(L), t, 0.15);
    EXPECT_EQ(r.n_opt, L + 2) << "L=" << L;
    EXPECT_LE(r.delta, 0.15);
    EXPECT_LE(r.scanned.at(r.n_opt - 1), 0.15);
  }
}

TEST(Nopt, TighterThresholdNeedsMoreSteps) {
  const int loose = find_nopt(ring(4), 16.0, 0.15).n_opt;
  const int tight = find_nopt(ring(4), 16.0, 0.05).n_opt;
  EXPECT_GT(tight, loose);
  EXPECT_THROW(find_nopt(ring(4), 16.0, 1e-6, 10), ProtocolError);
}

TEST(Ratio, Arithmetic) {
  EXPECT_DOUBLE_EQ(coherence_ratio(0.1, 0.9, 0.1, 0.9), 1.0);
  EXPECT_DOUBLE_EQ(coherence_ratio(0.3, 0.5, 0.0, 0.8), 0.25);
  EXPECT_DOUBLE_EQ(coherence_ratio(0.5, 0.3, 0.0, 0.8), -0.25);
  EXPECT_THROW(coherence_ratio(0.3, 0.5, 0.4, 0.4), ProtocolError);
  // Binomial shot noise on both noisy occupations.
  const double dR = ratio_stderr(0.2, 0.6, 0.01, 0.9, 1000.0);
  EXPECT_NEAR(dR, std::sqrt((0.2 * 0.8 + 0.6 * 0.4) / 1000.0) / 0.89, 1e-15);
  EXPECT_THROW(ratio_stderr(0.2, 0.6, 0.01, 0.9, 0.0), InputError);
}

TEST(Ratio, RowFromOccupations) {
  const RatioRow r = make_ratio_row(6, 0.2, 0.6, 0.01, 0.9, 1000);
  EXPECT_EQ(r.L, 6);
  EXPECT_DOUBLE_EQ(r.R, (0.2 - 0.6) / (0.01 - 0.9));
  EXPECT_DOUBLE_EQ(r.dR, ratio_stderr(0.2, 0.6, 0.01, 0.9, 1000.0));
  EXPECT_EQ(r.shots, 1000u);
}

TEST(QGradeRule, Examples) {
  const std::vector<RatioPoint> weak{{4, 0.682}, {6, 0.511}, {8, 0.340}, {10, 0.216}, {12, 0.120}};
  EXPECT_EQ(qgrade(weak, 0.2), QGrade::value(10));
  EXPECT_EQ(qgrade(weak, 0.5), QGrade::value(6));
  EXPECT_EQ(qgrade(weak, 0.9), QGrade::none());
  const std::vector<RatioPoint> strong{{4, 0.9}, {6, 0.8}};
  EXPECT_EQ(qgrade(strong, 0.2), QGrade::value(6));
  EXPECT_EQ(qgrade(strong, 0.2, true), QGrade::unbounded());
  EXPECT_EQ(qgrade(weak, 0.2, true), QGrade::value(10));
  EXPECT_EQ(QGrade::value(10).str(), "10");
  EXPECT_EQ(QGrade::none().str(), "none");
  EXPECT_EQ(QGrade::unbounded().str(), "unbounded");
}

TEST(QGradeRule, LargestPassingSize) {
  const std::vector<RatioPoint> bumpy{{4, 0.3}, {6, 0.1}, {8, 0.25}, {10, 0.05}};
  EXPECT_EQ(qgrade(bumpy, 0.2), QGrade::value(8));
}

TEST(QGradeRule, MonotoneInThreshold) {
  const std::vector<RatioPoint> rows{{4, 0.75}, {6, 0.55}, {8, 0.42}, {10, 0.31}, {12, 0.18}};
  int prev = 100;
  for (double thr = 0.1; thr < 0.9; thr += 0.05) {
    const QGrade g = qgrade(rows, thr);
    const int value = g.kind == QGrade::Kind::Value ? g.L : 0;
    EXPECT_LE(value, prev);
    prev = value;
  }
}

TEST(QGradeRule, InputValidation) {
  EXPECT_THROW(qgrade(std::vector<RatioPoint>{}, 0.2), InputError);
  EXPECT_THROW(qgrade(std::vector<RatioPoint>{{6, 0.5}, {4, 0.5}}, 0.2), InputError);
  EXPECT_THROW(qgrade(std::vector<RatioPoint>{{5, 0.5}}, 0.2), InputError);
}

TEST(Report, FinalizeSortsAndGrades) {
  QGradeReport rep;
  rep.threshold = 0.2;
  rep.rows = {make_ratio_row(8, 0.2, 0.4, 0.0, 0.8, 1000), make_ratio_row(4, 0.1, 0.8, 0.0, 0.9, 1000)};
  rep.finalize();
  EXPECT_EQ(rep.rows.front().L, 4);
  EXPECT_EQ(rep.grade, QGrade::value(8));
}

TEST(Calibration, RecordForL4) {
  const CalibrationRecord r = calibrate(ring(4));
  EXPECT_EQ(r.L, 4);
  EXPECT_EQ(r.t_max, 16);
  EXPECT_EQ(r.n_opt, 6);
  EXPECT_NEAR(r.n_v_0, 0.00113484336397307, 1e-12);
  EXPECT_NEAR(r.n_nov_0, 0.9170878773790562, 1e-12);
  EXPECT_EQ(r, calibrate(ring(4)));
}

}  // namespace
}  // namespace qgrade
