use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::types::CType;

pub type NodeId = u32;
pub type SymbolId = u32;

/// Inclusive 1-based line range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub const fn new(start: u32, end: u32) -> Self {
        Span { start, end }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn contains_line(&self, line: u32) -> bool {
        self.start <= line && line <= self.end
    }

    pub fn lines(&self) -> u32 {
        self.end - self.start + 1
    }
}

/// Node kinds of the MiniC AST.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Compound,
    If,
    For,
    While,
    DoWhile,
    Decl,
    ExprStmt,
    Return,
    Call,
    Assign,
    UnaryIncDec,
    VarRef,
    Literal,
    Index,
    Deref,
    AddrOf,
    Cast,
    BinaryOp,
    UnaryOp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationUnit {
    pub items: Vec<Item>,
    pub symbols: Vec<Symbol>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Item {
    /// Always a `StmtKind::Decl`.
    Global(Stmt),
    Function(FunctionDef),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionDef {
    pub id: NodeId,
    pub sym: SymbolId,
    pub name: String,
    /// `None` is `void`.
    pub ret: Option<CType>,
    pub params: Vec<Param>,
    /// Always a `StmtKind::Compound`.
    pub body: Stmt,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub sym: SymbolId,
    pub name: String,
    pub ty: CType,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decl {
    pub sym: SymbolId,
    pub name: String,
    pub ty: CType,
    pub init: Option<Init>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Init {
    Expr(Expr),
    List(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stmt {
    pub id: NodeId,
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StmtKind {
    Compound(Vec<Stmt>),
    If { cond: Expr, then_branch: Box<Stmt>, else_branch: Option<Box<Stmt>> },
    For { init: Option<ForInit>, cond: Option<Expr>, step: Option<Expr>, body: Box<Stmt> },
    While { cond: Expr, body: Box<Stmt> },
    DoWhile { body: Box<Stmt>, cond: Expr },
    Decl(Decl),
    Expr(Expr),
    Return(Option<Expr>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ForInit {
    /// Always a `StmtKind::Decl`.
    Decl(Box<Stmt>),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expr {
    pub id: NodeId,
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExprKind {
    Literal(Literal),
    VarRef { name: String, sym: SymbolId },
    Call { name: String, callee: Callee, args: Vec<Expr> },
    Assign { op: AssignOp, lhs: Box<Expr>, rhs: Box<Expr> },
    IncDec { op: IncDecOp, prefix: bool, operand: Box<Expr> },
    Index { base: Box<Expr>, index: Box<Expr> },
    Deref(Box<Expr>),
    AddrOf(Box<Expr>),
    Cast { ty: CType, expr: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: UnOp, operand: Box<Expr> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Callee {
    User(SymbolId),
    Builtin(Builtin),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub kind: LitKind,
    /// Source spelling, including a leading `-` for negative numbers and quotes for strings.
    pub text: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LitKind {
    Int,
    Float,
    Char,
    Str,
    /// `stdout` / `stderr`, only meaningful as the first argument of `fprintf`.
    Stream,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssignOp {
    Assign,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl AssignOp {
    pub fn spelling(self) -> &'static str {
        match self {
            AssignOp::Assign => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
            AssignOp::Div => "/=",
            AssignOp::Rem => "%=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IncDecOp {
    Inc,
    Dec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    LogAnd,
    LogOr,
}

impl BinOp {
    pub fn spelling(self) -> &'static str {
        match self {
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::BitAnd => "&",
            BinOp::BitXor => "^",
            BinOp::BitOr => "|",
            BinOp::LogAnd => "&&",
            BinOp::LogOr => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::LogOr => 2,
            BinOp::LogAnd => 3,
            BinOp::BitOr => 4,
            BinOp::BitXor => 5,
            BinOp::BitAnd => 6,
            BinOp::Eq | BinOp::Ne => 7,
            BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => 8,
            BinOp::Shl | BinOp::Shr => 9,
            BinOp::Add | BinOp::Sub => 10,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 11,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge | BinOp::Eq | BinOp::Ne)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::LogAnd | BinOp::LogOr)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
    BitNot,
}

impl UnOp {
    pub fn spelling(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Not => "!",
            UnOp::BitNot => "~",
        }
    }
}

/// Standard-library functions callable from MiniC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Builtin {
    Printf,
    Fprintf,
    Putchar,
    Puts,
    Abs,
    Fabs,
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
    Atan,
}

impl Builtin {
    pub const ALL: [Builtin; 12] = [
        Builtin::Printf,
        Builtin::Fprintf,
        Builtin::Putchar,
        Builtin::Puts,
        Builtin::Abs,
        Builtin::Fabs,
        Builtin::Sqrt,
        Builtin::Sin,
        Builtin::Cos,
        Builtin::Exp,
        Builtin::Log,
        Builtin::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Printf => "printf",
            Builtin::Fprintf => "fprintf",
            Builtin::Putchar => "putchar",
            Builtin::Puts => "puts",
            Builtin::Abs => "abs",
            Builtin::Fabs => "fabs",
            Builtin::Sqrt => "sqrt",
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Exp => "exp",
            Builtin::Log => "log",
            Builtin::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.iter().copied().find(|b| b.name() == name)
    }

    pub fn ret(self) -> CType {
        match self {
            Builtin::Printf | Builtin::Fprintf | Builtin::Putchar | Builtin::Puts | Builtin::Abs => CType::INT,
            _ => CType::DOUBLE,
        }
    }

    /// Minimum argument count, and the maximum unless variadic.
    pub fn arity(self) -> (usize, Option<usize>) {
        match self {
            Builtin::Printf => (1, None),
            Builtin::Fprintf => (2, None),
            _ => (1, Some(1)),
        }
    }

    pub fn is_output(self) -> bool {
        matches!(self, Builtin::Printf | Builtin::Fprintf | Builtin::Putchar | Builtin::Puts)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Symbol {
    pub id: SymbolId,
    pub name: String,
    pub kind: SymbolKind,
    /// Variable type, or the return type of a function (`None` for `void`).
    pub ty: Option<CType>,
    pub decl_line: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SymbolKind {
    Global,
    Local { function: SymbolId, depth: u32 },
    Param { function: SymbolId },
    Function { params: Vec<CType> },
    /// Declared outside the parsed fragment (operator contexts).
    ExternalVar,
    ExternalFunc,
}

impl SymbolKind {
    pub fn is_function(&self) -> bool {
        matches!(self, SymbolKind::Function { .. } | SymbolKind::ExternalFunc)
    }
}

impl TranslationUnit {
    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id as usize]
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Function(f) => Some(f),
            Item::Global(_) => None,
        })
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions().find(|f| f.name == name)
    }
}

impl Stmt {
    pub fn node_kind(&self) -> NodeKind {
        match &self.kind {
            StmtKind::Compound(_) => NodeKind::Compound,
            StmtKind::If { .. } => NodeKind::If,
            StmtKind::For { .. } => NodeKind::For,
            StmtKind::While { .. } => NodeKind::While,
            StmtKind::DoWhile { .. } => NodeKind::DoWhile,
            StmtKind::Decl(_) => NodeKind::Decl,
            StmtKind::Expr(_) => NodeKind::ExprStmt,
            StmtKind::Return(_) => NodeKind::Return,
        }
    }

    pub fn is_control(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::If { .. } | StmtKind::For { .. } | StmtKind::While { .. } | StmtKind::DoWhile { .. }
        )
    }

    pub fn as_decl(&self) -> Option<&Decl> {
        match &self.kind {
            StmtKind::Decl(d) => Some(d),
            _ => None,
        }
    }
}

impl Expr {
    pub fn node_kind(&self) -> NodeKind {
        match &self.kind {
            ExprKind::Literal(_) => NodeKind::Literal,
            ExprKind::VarRef { .. } => NodeKind::VarRef,
            ExprKind::Call { .. } => NodeKind::Call,
            ExprKind::Assign { .. } => NodeKind::Assign,
            ExprKind::IncDec { .. } => NodeKind::UnaryIncDec,
            ExprKind::Index { .. } => NodeKind::Index,
            ExprKind::Deref(_) => NodeKind::Deref,
            ExprKind::AddrOf(_) => NodeKind::AddrOf,
            ExprKind::Cast { .. } => NodeKind::Cast,
            ExprKind::Binary { .. } => NodeKind::BinaryOp,
            ExprKind::Unary { .. } => NodeKind::UnaryOp,
        }
    }

    /// Immediate subexpressions in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Literal(_) | ExprKind::VarRef { .. } => Vec::new(),
            ExprKind::Call { args, .. } => args.iter().collect(),
            ExprKind::Assign { lhs, rhs, .. } => alloc::vec![&**rhs, &**lhs],
            ExprKind::IncDec { operand, .. } => alloc::vec![&**operand],
            ExprKind::Index { base, index } => alloc::vec![&**base, &**index],
            ExprKind::Deref(e) | ExprKind::AddrOf(e) => alloc::vec![&**e],
            ExprKind::Cast { expr, .. } => alloc::vec![&**expr],
            ExprKind::Binary { lhs, rhs, .. } => alloc::vec![&**lhs, &**rhs],
            ExprKind::Unary { operand, .. } => alloc::vec![&**operand],
        }
    }
}
