/*
 * Copyright 2026 The fragdb Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "fragdb/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "fragdb/error.hpp"

namespace fragdb {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool iequals(std::string_view a, std::string_view b) { return lower(a) == lower(b); }

}  // namespace

bool Pred::operator==(const Pred& o) const {
  return kind == o.kind && lhs == o.lhs && rhs == o.rhs && value == o.value && set == o.set;
}

bool Scalar::is_real() const {
  switch (op) {
    case ScalarOp::Const: return real_const;
    case ScalarOp::Attr: return false;
    case ScalarOp::Div: return true;
    default:
      return std::any_of(kids.begin(), kids.end(), [](const Scalar& k) { return k.is_real(); });
  }
}

void Scalar::collect(std::vector<AttrRef>& out) const {
  if (op == ScalarOp::Attr) out.push_back(attr);
  for (const auto& k : kids) k.collect(out);
}

double Scalar::eval_real(const std::function<std::uint32_t(const AttrRef&)>& get) const {
  switch (op) {
    case ScalarOp::Const: return real_const ? rval : static_cast<double>(ival);
    case ScalarOp::Attr: return static_cast<double>(get(attr));
    case ScalarOp::Neg: return -kids[0].eval_real(get);
    case ScalarOp::Abs: return std::fabs(kids[0].eval_real(get));
    case ScalarOp::Add: return kids[0].eval_real(get) + kids[1].eval_real(get);
    case ScalarOp::Sub: return kids[0].eval_real(get) - kids[1].eval_real(get);
    case ScalarOp::Mul: return kids[0].eval_real(get) * kids[1].eval_real(get);
    case ScalarOp::Div: return kids[0].eval_real(get) / kids[1].eval_real(get);
  }
  return 0.0;
}

std::int64_t Scalar::eval_int(const std::function<std::uint32_t(const AttrRef&)>& get) const {
  switch (op) {
    case ScalarOp::Const: return real_const ? static_cast<std::int64_t>(rval) : ival;
    case ScalarOp::Attr: return get(attr);
    case ScalarOp::Neg: return -kids[0].eval_int(get);
    case ScalarOp::Abs: {
      const auto v = kids[0].eval_int(get);
      return v < 0 ? -v : v;
    }
    case ScalarOp::Add: return kids[0].eval_int(get) + kids[1].eval_int(get);
    case ScalarOp::Sub: return kids[0].eval_int(get) - kids[1].eval_int(get);
    case ScalarOp::Mul: return kids[0].eval_int(get) * kids[1].eval_int(get);
    case ScalarOp::Div: return static_cast<std::int64_t>(eval_real(get));
  }
  return 0;
}

std::string_view agg_name(AggFn fn) {
  switch (fn) {
    case AggFn::Count: return "COUNT";
    case AggFn::Sum: return "SUM";
    case AggFn::Min: return "MIN";
    case AggFn::Max: return "MAX";
    case AggFn::Avg: return "AVG";
    case AggFn::Median: return "MEDIAN";
  }
  return "?";
}

std::vector<std::string> table_attributes(const Catalog& catalog, const std::string& table) {
  std::vector<std::string> out;
  if (const auto* e = catalog.entity(table)) {
    out.push_back("ID");
    for (const auto& a : e->attributes) out.push_back(a.name);
  } else if (const auto* r = catalog.relationship(table)) {
    out.push_back(r->fk1.name);
    out.push_back(r->fk2.name);
    for (const auto& m : r->measures) out.push_back(m.name);
  } else {
    fail(Errc::UnknownTable, "unknown table " + table);
  }
  return out;
}

bool is_key_attribute(const Catalog& catalog, const VarDef& var, const std::string& attr) {
  if (var.entity) return attr == "ID";
  const auto* r = catalog.relationship(var.table);
  return r && (attr == r->fk1.name || attr == r->fk2.name);
}

std::string key_entity(const Catalog& catalog, const VarDef& var, const std::string& attr) {
  if (var.entity) {
    if (attr != "ID") fail(Errc::Internal, var.table + "." + attr + " is not a key");
    return var.table;
  }
  const auto* r = catalog.relationship(var.table);
  if (r && attr == r->fk1.name) return r->fk1.entity;
  if (r && attr == r->fk2.name) return r->fk2.entity;
  fail(Errc::Internal, var.table + "." + attr + " is not a key");
}

std::optional<std::uint32_t> bind_key(const Catalog& catalog, const std::string& entity,
                                      const Value& value, std::span<const std::string> params) {
  std::string text = value.literal;
  if (value.param) {
    if (*value.param >= params.size())
      fail(Errc::ParameterMismatch, "parameter ?" + std::to_string(*value.param) + " is unbound (" +
                                        std::to_string(params.size()) + " given)");
    text = params[*value.param];
  }
  const auto* e = catalog.entity(entity);
  if (!e) fail(Errc::UnknownTable, "unknown entity " + entity);
  if (e->declared_size) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) return std::nullopt;
    if (v >= *e->declared_size) return std::nullopt;
    return static_cast<std::uint32_t>(v);
  }
  const Dictionary* d = catalog.find_key_dictionary(entity);
  if (!d) return std::nullopt;
  return d->find(text);
}

std::string format_attr(const std::vector<VarDef>& vars, const AttrRef& ref) {
  return vars.at(ref.var).name + "." + ref.attr;
}

std::string format_scalar(const Scalar& s, const AttrNamer& name) {
  auto bin = [&](const char* op) {
    return "(" + format_scalar(s.kids[0], name) + " " + op + " " + format_scalar(s.kids[1], name) + ")";
  };
  switch (s.op) {
    case ScalarOp::Const: {
      if (!s.real_const) return std::to_string(s.ival);
      char buf[64];
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, s.rval);
      return std::string(buf, p);
    }
    case ScalarOp::Attr: return name(s.attr);
    case ScalarOp::Neg: return "-" + format_scalar(s.kids[0], name);
    case ScalarOp::Abs: {
      std::string inner = format_scalar(s.kids[0], name);
      return inner.front() == '(' ? "abs" + inner : "abs(" + inner + ")";
    }
    case ScalarOp::Add: return bin("+");
    case ScalarOp::Sub: return bin("-");
    case ScalarOp::Mul: return bin("*");
    case ScalarOp::Div: return bin("/");
  }
  return "?";
}

std::string format_agg(const AggSpec& agg, const AttrNamer& name) {
  std::string inner = agg.arg ? format_scalar(*agg.arg, name) : "*";
  if (inner.size() > 1 && inner.front() == '(' && inner.back() == ')') inner = inner.substr(1, inner.size() - 2);
  return std::string(agg_name(agg.fn)) + "(" + inner + ")";
}

std::string format_scalar(const std::vector<VarDef>& vars, const Scalar& s) {
  return format_scalar(s, [&](const AttrRef& a) { return format_attr(vars, a); });
}

std::string format_agg(const std::vector<VarDef>& vars, const AggSpec& agg) {
  return format_agg(agg, [&](const AttrRef& a) { return format_attr(vars, a); });
}

namespace {

class Translator {
 public:
  explicit Translator(const Catalog& catalog) : catalog_(catalog) {}

  Algebra run(const sql::Statement& st) {
    Algebra a;
    a.root = block(st.select, true);
    a.vars = std::move(vars_);
    a.param_count = st.param_count;
    return a;
  }

 private:
  struct Scope {
    std::vector<std::pair<std::string, std::size_t>> aliases;  // lower-case alias -> var
  };

  std::string unique_name(const std::string& alias) {
    std::string name = alias;
    for (int k = 2; used_.count(lower(name)); ++k) name = alias + "_" + std::to_string(k);
    used_.insert(lower(name));
    return name;
  }

  Block block(const sql::Select& s, bool top) {
    Block b;
    Scope scope;
    for (const auto& t : s.from) {
      auto canonical = catalog_.resolve_table(t.table);
      if (!canonical) fail(Errc::UnknownTable, "unknown table " + t.table);
      for (const auto& [al, v] : scope.aliases)
        if (al == lower(t.alias)) fail(Errc::SyntaxError, "duplicate tuple variable " + t.alias);
      VarDef v{unique_name(t.alias), *canonical, catalog_.entity(*canonical) != nullptr};
      scope.aliases.emplace_back(lower(t.alias), vars_.size());
      b.vars.push_back(vars_.size());
      vars_.push_back(std::move(v));
    }
    for (const auto& p : s.on) b.preds.push_back(predicate(p, scope));
    for (const auto& p : s.where) b.preds.push_back(predicate(p, scope));

    if (!top) {
      if (!s.group_by.empty() || s.items.size() != 1 || s.items[0].kind != sql::ExprKind::Column)
        fail(Errc::UnsupportedFeature, "a subquery must select exactly one column");
      b.outputs.push_back(column(s.items[0].column, scope));
      return b;
    }

    if (s.group_by.empty()) {
      for (const auto& item : s.items) {
        if (item.kind != sql::ExprKind::Column)
          fail(Errc::UnsupportedFeature,
               "select item " + sql::format_expr(item) + " needs GROUP BY; only key columns may be listed otherwise");
        b.outputs.push_back(column(item.column, scope));
      }
      return b;
    }

    if (s.items.size() < 2 || !contains_call(s.items.back()))
      fail(Errc::UnsupportedFeature, "a grouped query selects the group key and one aggregate");
    for (std::size_t i = 0; i + 1 < s.items.size(); ++i) {
      if (s.items[i].kind != sql::ExprKind::Column)
        fail(Errc::UnsupportedFeature, "only one aggregate item is supported");
      b.outputs.push_back(column(s.items[i].column, scope));
    }
    for (const auto& g : s.group_by) b.group_by.push_back(group_column(g, scope, b.outputs));
    if (b.outputs.size() != b.group_by.size() ||
        !std::is_permutation(b.outputs.begin(), b.outputs.end(), b.group_by.begin()))
      fail(Errc::NotNormalizable, "the selected key columns must be the GROUP BY columns");
    b.outputs = b.group_by;
    b.agg = aggregate(s.items.back(), scope);
    return b;
  }

  // GROUP BY r.ID on a relationship names the grouped foreign key (the select key).
  AttrRef group_column(const sql::ColumnRef& c, const Scope& scope, const std::vector<AttrRef>& keys) {
    if (iequals(c.name, "ID") && !c.qualifier.empty()) {
      const std::size_t v = var_of(c.qualifier, scope);
      if (!vars_[v].entity) {
        for (const auto& k : keys)
          if (k.var == v && is_key_attribute(catalog_, vars_[v], k.attr)) return k;
      }
    }
    return column(c, scope);
  }

  std::size_t var_of(const std::string& qualifier, const Scope& scope) const {
    for (const auto& [al, v] : scope.aliases)
      if (al == lower(qualifier)) return v;
    fail(Errc::UnknownTable, "unknown tuple variable " + qualifier);
  }

  std::optional<std::string> attribute_of(std::size_t v, const std::string& name) const {
    for (const auto& a : table_attributes(catalog_, vars_[v].table))
      if (iequals(a, name)) return a;
    return std::nullopt;
  }

  AttrRef column(const sql::ColumnRef& c, const Scope& scope) const {
    if (!c.qualifier.empty()) {
      const std::size_t v = var_of(c.qualifier, scope);
      auto a = attribute_of(v, c.name);
      if (!a) fail(Errc::UnknownAttribute, "unknown attribute " + c.qualifier + "." + c.name);
      return {v, *a};
    }
    std::optional<AttrRef> found;
    for (const auto& [al, v] : scope.aliases) {
      if (auto a = attribute_of(v, c.name)) {
        if (found) fail(Errc::AmbiguousAttribute, "attribute " + c.name + " is ambiguous");
        found = AttrRef{v, *a};
      }
    }
    if (!found) fail(Errc::UnknownAttribute, "unknown attribute " + c.name);
    return *found;
  }

  static std::optional<Value> constant(const sql::Expr& e) {
    switch (e.kind) {
      case sql::ExprKind::Int: return Value{std::nullopt, std::to_string(e.ival)};
      case sql::ExprKind::String: return Value{std::nullopt, e.text};
      case sql::ExprKind::Param: return Value{e.param, ""};
      case sql::ExprKind::Neg:
        if (e.args[0].kind == sql::ExprKind::Int) return Value{std::nullopt, "-" + std::to_string(e.args[0].ival)};
        return std::nullopt;
      default: return std::nullopt;
    }
  }

  Pred predicate(const sql::Predicate& p, const Scope& scope) {
    Pred out;
    if (p.kind == sql::Predicate::Kind::In) {
      if (p.lhs.kind != sql::ExprKind::Column)
        fail(Errc::UnsupportedFeature, "IN needs a column on the left");
      out.kind = Pred::Kind::In;
      out.lhs = column(p.lhs.column, scope);
      for (const auto& term : p.set.terms) out.set.push_back(block(term, false));
      return out;
    }
    const bool lc = p.lhs.kind == sql::ExprKind::Column;
    const bool rc = p.rhs.kind == sql::ExprKind::Column;
    if (lc && rc) {
      out.kind = Pred::Kind::EqAttr;
      out.lhs = column(p.lhs.column, scope);
      out.rhs = column(p.rhs.column, scope);
      return out;
    }
    const sql::Expr& col = lc ? p.lhs : p.rhs;
    const sql::Expr& val = lc ? p.rhs : p.lhs;
    auto v = constant(val);
    if ((!lc && !rc) || !v)
      fail(Errc::UnsupportedFeature, "predicate " + sql::format_expr(p.lhs) + " = " + sql::format_expr(p.rhs) +
                                         " is not a column equality or a column-constant equality");
    out.kind = Pred::Kind::EqConst;
    out.lhs = column(col.column, scope);
    out.value = *v;
    return out;
  }

  static bool contains_call(const sql::Expr& e) {
    if (e.kind == sql::ExprKind::Call) return true;
    return std::any_of(e.args.begin(), e.args.end(), contains_call);
  }

  Scalar scalar(const sql::Expr& e, const Scope& scope) const {
    Scalar s;
    auto unary = [&](ScalarOp op) {
      s.op = op;
      s.kids.push_back(scalar(e.args[0], scope));
    };
    auto binary = [&](ScalarOp op) {
      s.op = op;
      s.kids.push_back(scalar(e.args[0], scope));
      s.kids.push_back(scalar(e.args[1], scope));
    };
    switch (e.kind) {
      case sql::ExprKind::Int: s.ival = e.ival; break;
      case sql::ExprKind::Real:
        s.real_const = true;
        s.rval = e.rval;
        break;
      case sql::ExprKind::Column:
        s.op = ScalarOp::Attr;
        s.attr = column(e.column, scope);
        break;
      case sql::ExprKind::Neg: unary(ScalarOp::Neg); break;
      case sql::ExprKind::Abs: unary(ScalarOp::Abs); break;
      case sql::ExprKind::Add: binary(ScalarOp::Add); break;
      case sql::ExprKind::Sub: binary(ScalarOp::Sub); break;
      case sql::ExprKind::Mul: binary(ScalarOp::Mul); break;
      case sql::ExprKind::Div: binary(ScalarOp::Div); break;
      case sql::ExprKind::Call:
        fail(Errc::UnsupportedFeature, "nested aggregate " + sql::format_expr(e));
      default:
        fail(Errc::UnsupportedFeature, "unsupported operand " + sql::format_expr(e) + " in an aggregate expression");
    }
    return s;
  }

  AggSpec aggregate(const sql::Expr& e, const Scope& scope) const {
    if (e.kind == sql::ExprKind::Call) {
      AggSpec a;
      static const std::pair<const char*, AggFn> kFns[] = {{"COUNT", AggFn::Count}, {"SUM", AggFn::Sum},
                                                           {"MIN", AggFn::Min},     {"MAX", AggFn::Max},
                                                           {"AVG", AggFn::Avg},     {"MEDIAN", AggFn::Median}};
      auto it = std::find_if(std::begin(kFns), std::end(kFns), [&](const auto& f) { return e.text == f.first; });
      if (it == std::end(kFns)) fail(Errc::UnsupportedFeature, "unknown aggregate " + e.text);
      a.fn = it->second;
      if (e.args.size() != 1) fail(Errc::SyntaxError, e.text + " takes one argument");
      if (a.fn == AggFn::Count) return a;  // COUNT(col) counts rows: keys are never NULL
      if (e.args[0].kind == sql::ExprKind::Star) fail(Errc::SyntaxError, e.text + "(*) is not meaningful");
      a.arg = scalar(e.args[0], scope);
      return a;
    }
    if ((e.kind == sql::ExprKind::Mul || e.kind == sql::ExprKind::Div) && e.args.size() == 2) {
      const bool left = contains_call(e.args[0]);
      const bool right = contains_call(e.args[1]);
      if (left != right && (left || e.kind == sql::ExprKind::Mul)) {
        AggSpec inner = aggregate(e.args[left ? 0 : 1], scope);
        if (inner.fn == AggFn::Count) {
          inner.fn = AggFn::Sum;
          inner.arg = Scalar::constant(1);
        }
        if (inner.fn != AggFn::Sum)
          fail(Errc::UnsupportedFeature, "only SUM and COUNT may be scaled by a per-row expression");
        Scalar other = scalar(e.args[left ? 1 : 0], scope);
        Scalar s;
        s.op = e.kind == sql::ExprKind::Mul ? ScalarOp::Mul : ScalarOp::Div;
        if (left) {
          s.kids = {std::move(*inner.arg), std::move(other)};
        } else {
          s.kids = {std::move(other), std::move(*inner.arg)};
        }
        inner.arg = std::move(s);
        return inner;
      }
    }
    fail(Errc::UnsupportedFeature, "aggregate expression " + sql::format_expr(e) +
                                       " must be an aggregate, optionally multiplied or divided by a row expression");
  }

  const Catalog& catalog_;
  std::vector<VarDef> vars_;
  std::set<std::string> used_;
};

}  // namespace

Algebra translate(const sql::Statement& statement, const Catalog& catalog) {
  return Translator(catalog).run(statement);
}

Algebra translate_sql(std::string_view text, const Catalog& catalog) {
  return translate(sql::parse_sql(text), catalog);
}

}  // namespace fragdb
