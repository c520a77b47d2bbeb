#include "gpsinfer/transforms.hpp"

#include <stdexcept>

#include "gpsinfer/errors.hpp"

namespace gpsinfer {

Transformer make_transformer(const std::string& name) {
  if (name == "pow2") return {"pow2", [](double x) { return x * x; }};
  if (name == "pow3") return {"pow3", [](double x) { return x * x * x; }};
  throw std::invalid_argument("unknown transformer: " + name);
}

CovariateColumn apply_transformer(const Transformer& transformer,
                                  const CovariateColumn& column) {
  if (column.kind != CovariateKind::numeric) {
    throw NonNumericColumn("cannot transform categorical covariate '" + column.name + "'");
  }
  if (!transformer.fn) throw std::invalid_argument("transformer has no function");
  CovariateColumn out = column;
  for (double& v : out.numeric) v = transformer.fn(v);
  return out;
}

CovariateColumn apply_ledger(const TransformLedger& ledger, const CovariateColumn& column) {
  CovariateColumn out = column;
  for (const auto& [name, transformer] : ledger) {
    if (name == column.name) out = apply_transformer(transformer, out);
  }
  return out;
}

}  // namespace gpsinfer
