use super::ast::{Callee, Expr, ExprKind, LitKind, Symbol};
use super::types::{BaseType, CType, Derivation};

/// Static type of `e`, or `None` for strings, streams and `void` calls.
///
/// Integer arithmetic is reported as `int` or the wider operand type; the
/// result is precise enough to separate integer from floating-point work.
pub fn expr_type(symbols: &[Symbol], e: &Expr) -> Option<CType> {
    match &e.kind {
        ExprKind::Literal(l) => match l.kind {
            LitKind::Int => {
                let t = l.text.to_ascii_lowercase();
                let base = match (t.contains('u'), t.matches('l').count()) {
                    (false, 0) => BaseType::Int,
                    (true, 0) => BaseType::UInt,
                    (false, 1) => BaseType::Long,
                    (true, 1) => BaseType::ULong,
                    (false, _) => BaseType::LongLong,
                    (true, _) => BaseType::ULongLong,
                };
                Some(CType::scalar(base))
            }
            LitKind::Float => {
                let is_hex = l.text.contains("0x") || l.text.contains("0X");
                if !is_hex && (l.text.ends_with('f') || l.text.ends_with('F')) {
                    Some(CType::scalar(BaseType::Float))
                } else {
                    Some(CType::DOUBLE)
                }
            }
            LitKind::Char => Some(CType::INT),
            LitKind::Str | LitKind::Stream => None,
        },
        ExprKind::VarRef { sym, .. } => symbols.get(*sym as usize).and_then(|s| s.ty),
        ExprKind::Call { callee, .. } => match callee {
            Callee::Builtin(b) => Some(b.ret()),
            Callee::User(sym) => symbols.get(*sym as usize).and_then(|s| s.ty),
        },
        ExprKind::Assign { lhs, .. } => expr_type(symbols, lhs),
        ExprKind::IncDec { operand, .. } => expr_type(symbols, operand),
        ExprKind::Index { base, .. } => expr_type(symbols, base).and_then(|t| t.element()),
        ExprKind::Deref(inner) => expr_type(symbols, inner).and_then(|t| t.element()),
        ExprKind::AddrOf(inner) => expr_type(symbols, inner).map(|t| t.address_of()),
        ExprKind::Cast { ty, .. } => Some(*ty),
        ExprKind::Unary { op, operand } => match op {
            super::ast::UnOp::Not => Some(CType::INT),
            _ => expr_type(symbols, operand).map(promote),
        },
        ExprKind::Binary { op, lhs, rhs } => {
            if op.is_comparison() || op.is_logical() {
                return Some(CType::INT);
            }
            let l = expr_type(symbols, lhs)?;
            let r = expr_type(symbols, rhs)?;
            Some(arith(l, r))
        }
    }
}

fn promote(t: CType) -> CType {
    if t.is_scalar() && !t.base.is_floating() && t.base < BaseType::Int {
        CType::INT
    } else {
        t
    }
}

fn arith(l: CType, r: CType) -> CType {
    if !l.is_scalar() {
        return decay(l);
    }
    if !r.is_scalar() {
        return decay(r);
    }
    let (l, r) = (promote(l), promote(r));
    if l.base.is_floating() || r.base.is_floating() {
        if l.base == BaseType::Double || r.base == BaseType::Double {
            return CType::DOUBLE;
        }
        return CType::scalar(BaseType::Float);
    }
    if l.base >= r.base {
        l
    } else {
        r
    }
}

fn decay(t: CType) -> CType {
    match t.derivation {
        Derivation::Array(_) => CType::pointer(t.base, 1),
        _ => t,
    }
}

/// True when evaluating `e` (as an arithmetic operand) is floating-point work.
pub fn is_floating(symbols: &[Symbol], e: &Expr) -> bool {
    expr_type(symbols, e).is_some_and(|t| t.is_floating())
}
