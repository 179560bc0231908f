#include <gtest/gtest.h>

#include "netreduce/timeseries.hpp"

using namespace netreduce;

namespace {

TimeSeries make(std::vector<double> t, std::vector<double> a, SeriesKind kind) {
  TimeSeries ts;
  ts.species = {"A"};
  ts.times = std::move(t);
  ts.states.resize(static_cast<Eigen::Index>(a.size()), 1);
  for (std::size_t i = 0; i < a.size(); ++i) ts.states(static_cast<Eigen::Index>(i), 0) = a[i];
  ts.kind = kind;
  return ts;
}

}  // namespace

TEST(TimeSeries, JumpAverageHoldsLeftValue) {
  const TimeSeries ts = make({0.0, 1.0, 3.0}, {2.0, 5.0, 100.0}, SeriesKind::ssa);
  EXPECT_DOUBLE_EQ(time_average(ts)[0], (2.0 * 1.0 + 5.0 * 2.0) / 3.0);
}

TEST(TimeSeries, ContinuousAverageIsTrapezoid) {
  const TimeSeries ts = make({0.0, 1.0, 3.0}, {2.0, 4.0, 0.0}, SeriesKind::ode);
  EXPECT_DOUBLE_EQ(time_average(ts)[0], (3.0 * 1.0 + 2.0 * 2.0) / 3.0);
}

TEST(TimeSeries, CsvRoundTripIsExact) {
  TimeSeries ts = make({0.0, 0.1, 0.30000000000000004}, {1.0 / 3.0, 2e-300, 123456789.123}, SeriesKind::ode);
  const TimeSeries back = from_csv(to_csv(ts));
  EXPECT_EQ(back.times, ts.times);
  EXPECT_EQ(back.states, ts.states);
  EXPECT_EQ(back.species, ts.species);
}

TEST(TimeSeries, CsvErrors) {
  EXPECT_THROW(from_csv(""), std::invalid_argument);
  EXPECT_THROW(from_csv("x,A\n0,1\n"), std::invalid_argument);
  EXPECT_THROW(from_csv("t,A\n0,1,2\n"), std::invalid_argument);
  EXPECT_THROW(from_csv("t,A\n0,abc\n"), std::invalid_argument);
  EXPECT_THROW(from_csv("t,A\n0,1\n0,2\n"), std::invalid_argument);
}

TEST(TimeSeries, ValidateRejectsBadSeries) {
  TimeSeries ts = make({0.0, 1.0}, {1.0, 2.0}, SeriesKind::ode);
  EXPECT_NO_THROW(ts.validate());
  ts.times[1] = 0.0;
  EXPECT_THROW(ts.validate(), std::invalid_argument);
  ts.times[1] = 1.0;
  ts.states(1, 0) = std::nan("");
  EXPECT_THROW(ts.validate(), std::invalid_argument);
}

TEST(TimeSeries, ConcatenateDropsSharedRecord) {
  const TimeSeries a = make({0.0, 1.0}, {1.0, 2.0}, SeriesKind::ode);
  const TimeSeries b = make({1.0, 2.0}, {2.0, 3.0}, SeriesKind::ode);
  const TimeSeries c = concatenate(a, b);
  EXPECT_EQ(c.times, (std::vector<double>{0.0, 1.0, 2.0}));
  EXPECT_EQ(c.states(2, 0), 3.0);
  EXPECT_THROW(concatenate(a, make({1.5, 2.0}, {1.0, 1.0}, SeriesKind::ode)), std::invalid_argument);
}

TEST(TimeSeries, AlignReordersColumns) {
  TimeSeries ts;
  ts.species = {"A", "B"};
  ts.times = {0.0, 1.0};
  ts.states.resize(2, 2);
  ts.states << 1, 2, 3, 4;
  const TimeSeries al = align_series(ts, {"B", "A"});
  EXPECT_EQ(al.states(1, 0), 4.0);
  EXPECT_EQ(al.states(1, 1), 3.0);
  EXPECT_THROW(align_series(ts, {"C"}), std::invalid_argument);
}

TEST(TimeSeries, WindowHoldsOrInterpolates) {
  const TimeSeries jump = make({0.0, 1.0, 3.0}, {2.0, 5.0, 7.0}, SeriesKind::ssa);
  const TimeSeries wj = window(jump, 2.0);
  EXPECT_EQ(wj.times, (std::vector<double>{2.0, 3.0}));
  EXPECT_EQ(wj.states(0, 0), 5.0);
  const TimeSeries cont = make({0.0, 1.0, 3.0}, {2.0, 5.0, 7.0}, SeriesKind::ode);
  const TimeSeries wc = window(cont, 2.0);
  EXPECT_DOUBLE_EQ(wc.states(0, 0), 6.0);
  EXPECT_THROW(window(cont, 3.0), std::invalid_argument);
}
