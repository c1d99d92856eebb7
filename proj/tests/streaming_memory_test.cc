// Copyright 2026 The ldphist Authors
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

// Allocation accounting for streamed privatisation: releasing n records over
// N cells must not allocate per record.

#include <atomic>
#include <cstdlib>
#include <new>
#include <vector>

#include "gtest/gtest.h"
#include "ldphist/estimator.h"
#include "ldphist/mechanism.h"
#include "ldphist/partition.h"
#include "ldphist/random.h"

namespace {

std::atomic<std::size_t> g_allocations{0};
std::atomic<std::size_t> g_bytes{0};

}  // namespace

void* operator new(std::size_t size) {
  g_allocations.fetch_add(1, std::memory_order_relaxed);
  g_bytes.fetch_add(size, std::memory_order_relaxed);
  if (void* p = std::malloc(size == 0 ? 1 : size)) return p;
  throw std::bad_alloc();
}

void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

namespace ldphist {
namespace {

TEST(StreamingMemoryTest, NoPerRecordAllocation) {
  // d = 1, h = 0.001, r = 0.5 gives N = 1000 cells.
  const auto spec = PartitionSpec::Create(1, 0.001, 0.4995).value();
  const auto cells = ActiveCells::Enumerate(spec).value();
  ASSERT_GE(cells.count(), 999u);
  ASSERT_LE(cells.count(), 1001u);
  const auto params = PrivacyParams::ForAlpha(1.0).value();
  CellCounts counts(cells.count());
  NoiseSums sums(cells.count());
  TeeSink<CellCounts, NoiseSums> both{&counts, &sums};
  Rng rng(1);
  std::vector<double> x(1);

  const std::size_t allocations_before = g_allocations.load();
  const std::size_t bytes_before = g_bytes.load();
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    x[0] = UniformIn(rng, -0.5, 0.5);
    PrivatizeStream(x, spec, cells, params, rng, both);
  }
  const std::size_t allocations = g_allocations.load() - allocations_before;
  const std::size_t bytes = g_bytes.load() - bytes_before;
  EXPECT_EQ(allocations, 0u);
  EXPECT_EQ(bytes, 0u);
  EXPECT_EQ(counts.n(), n);
  // Materialising n x N doubles would take 80 MB; the accumulators hold
  // O(N).
  EXPECT_LT(counts.le_zero().capacity() * sizeof(std::int64_t) +
                sums.sums().capacity() * sizeof(double),
            64u * cells.count());
}

TEST(StreamingMemoryTest, MaterialisedRecordsDoAllocate) {
  // Control: the counter sees allocations when they happen.
  const auto spec = PartitionSpec::Create(1, 0.01, 0.5).value();
  const auto cells = ActiveCells::Enumerate(spec).value();
  const auto params = PrivacyParams::ForAlpha(1.0).value();
  Rng rng(2);
  std::vector<double> x{0.1};
  const std::size_t before = g_allocations.load();
  const auto record = Privatize(x, spec, cells, params, rng);
  EXPECT_GT(g_allocations.load(), before);
  EXPECT_EQ(record.w.size(), cells.count());
}

}  // namespace
}  // namespace ldphist
