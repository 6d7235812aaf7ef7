#include "hk/compiled.hpp"

#include <algorithm>
#include <cmath>

#include "hk/error.hpp"
#include "symbolic/internal.hpp"

namespace hk::sym {

CompiledExpr::CompiledExpr(const std::vector<Expr>& outputs, std::vector<Var> slots) : slots_(std::move(slots)) {
  std::vector<const Atom*> atoms;
  outputs_.reserve(outputs.size());
  for (const auto& e : outputs) outputs_.push_back(compile(e, atoms));
}

std::uint32_t CompiledExpr::atom_index(const std::shared_ptr<const Atom>& a, std::vector<const Atom*>& atoms) {
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const Atom* b = atoms[k];
    if (b == a.get() || (b->kind == a->kind && b->hash == a->hash && b->arg == a->arg))
      return static_cast<std::uint32_t>(slots_.size() + k);
  }
  // Arguments are compiled first so atoms are stored in dependency order.
  const Program arg = compile(a->arg, atoms);
  atoms.push_back(a.get());
  atoms_.push_back(AtomOp{a->kind, arg});
  return static_cast<std::uint32_t>(slots_.size() + atoms.size() - 1);
}

CompiledExpr::Program CompiledExpr::compile(const Expr& e, std::vector<const Atom*>& atoms) {
  std::vector<Term> local;
  std::vector<Factor> local_factors;
  for (const auto& t : e.terms()) {
    std::vector<Factor> fs;
    for (const auto& p : t.mono) {
      std::uint32_t index = 0;
      if (p.base.is_var()) {
        auto it = std::find(slots_.begin(), slots_.end(), p.base.var);
        if (it == slots_.end()) throw UnboundVariable(p.base.var.name());
        index = static_cast<std::uint32_t>(it - slots_.begin());
      } else {
        index = atom_index(p.base.atom, atoms);
      }
      fs.push_back(Factor{index, p.exponent.num(), p.exponent.den()});
    }
    local.push_back(Term{t.coeff.get_d(), static_cast<std::uint32_t>(local_factors.size()),
                         static_cast<std::uint32_t>(fs.size())});
    local_factors.insert(local_factors.end(), fs.begin(), fs.end());
  }
  const auto factor_base = static_cast<std::uint32_t>(factors_.size());
  factors_.insert(factors_.end(), local_factors.begin(), local_factors.end());
  const auto first = static_cast<std::uint32_t>(terms_.size());
  for (auto t : local) {
    t.first += factor_base;
    terms_.push_back(t);
  }
  return Program{first, static_cast<std::uint32_t>(local.size())};
}

double CompiledExpr::run(const Program& p, const double* values, double* magnitude) const {
  double acc = 0.0;
  double mag = 0.0;
  for (std::uint32_t k = p.first; k < p.first + p.count; ++k) {
    const Term& t = terms_[k];
    double v = t.coeff;
    for (std::uint32_t f = t.first; f < t.first + t.count; ++f) {
      const Factor& fa = factors_[f];
      const double b = values[fa.index];
      if (fa.den == 1 && fa.num == 1)
        v *= b;
      else if (fa.den == 1 && fa.num == 2)
        v *= b * b;
      else
        v *= detail::checked_pow(b, Frac(fa.num, fa.den));
    }
    acc += v;
    mag += std::fabs(v);
  }
  if (magnitude) *magnitude = mag;
  return acc;
}

void CompiledExpr::eval(std::span<const double> in, std::span<double> out, std::span<double> magnitude) const {
  if (in.size() != slots_.size()) throw InvalidArgument("compiled expression: wrong number of inputs");
  if (out.size() < outputs_.size()) throw InvalidArgument("compiled expression: output buffer too small");
  thread_local std::vector<double> values;
  values.assign(in.begin(), in.end());
  values.resize(slots_.size() + atoms_.size());
  for (std::size_t k = 0; k < atoms_.size(); ++k)
    values[slots_.size() + k] = detail::apply_function(atoms_[k].kind, run(atoms_[k].arg, values.data(), nullptr));
  for (std::size_t k = 0; k < outputs_.size(); ++k)
    out[k] = run(outputs_[k], values.data(), magnitude.empty() ? nullptr : &magnitude[k]);
}

}  // namespace hk::sym
