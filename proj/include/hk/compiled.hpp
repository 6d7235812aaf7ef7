#pragma once

#include <span>
#include <vector>

#include "hk/expr.hpp"

namespace hk::sym {

// Double-precision evaluator for a batch of expressions sharing one set of
// input slots. Atoms common to several outputs are evaluated once per call.
// Thread-safe for concurrent eval() calls.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const std::vector<Expr>& outputs, std::vector<Var> slots);

  std::size_t num_outputs() const { return outputs_.size(); }
  std::size_t num_slots() const { return slots_.size(); }
  const std::vector<Var>& slots() const { return slots_; }

  // Throws EvaluationSingularity (without a node) on log/power domain errors.
  // If `magnitude` is non-empty it receives sum |term| per output.
  void eval(std::span<const double> in, std::span<double> out, std::span<double> magnitude = {}) const;

 private:
  struct Factor {
    std::uint32_t index;  // slot, or num_slots + atom
    std::int64_t num;
    std::int64_t den;
  };
  struct Term {
    double coeff;
    std::uint32_t first;
    std::uint32_t count;
  };
  struct Program {
    std::uint32_t first;
    std::uint32_t count;
  };
  struct AtomOp {
    AtomKind kind;
    Program arg;
  };

  Program compile(const Expr& e, std::vector<const Atom*>& atoms);
  std::uint32_t atom_index(const std::shared_ptr<const Atom>& a, std::vector<const Atom*>& atoms);
  double run(const Program& p, const double* values, double* magnitude) const;

  std::vector<Var> slots_;
  std::vector<Factor> factors_;
  std::vector<Term> terms_;
  std::vector<AtomOp> atoms_;
  std::vector<Program> outputs_;
};

}  // namespace hk::sym
