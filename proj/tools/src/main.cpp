// knnshap: batch front end for KNN data valuation.
//
// Usage:
//   knnshap ingest --in data.csv [--label y] [--task regression] [--out data.bin]
//   knnshap synth --n 1000 --d 32 --seed 7 --out train.csv [--test-n 100 --test-out test.csv]
//   knnshap value <exact|truncated|lsh|mc|weighted|seller|composite|oracle>
//       --train train.csv --test test.csv [--k 3] [--epsilon 0.1] [--delta 0.1]
//       [--bound bennett] [--seed 0] [--sellers owners.csv] [--weights inverse]
//       [--composite] [--budget-override] [--threads N] [--out r.json] [--format csv]
//   knnshap bench <exact-vs-baseline|bennett-vs-hoeffding|weighted-exact-vs-mc>
//       [--sizes 1000,10000] [--k-values 1,2,3] [--out bench.csv]
//
// Exit codes: 0 ok, 2 usage error, 3 data error, 4 work budget refused.

#include <iostream>

#include "knnshap_tools/cli.hpp"

int main(int argc, char** argv) {
  return knnshap::tools::run_cli(argc, argv, std::cout, std::cerr);
}
