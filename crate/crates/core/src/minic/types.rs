use alloc::format;
use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Scalar base types admitted by MiniC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BaseType {
    Char,
    SChar,
    UChar,
    Short,
    UShort,
    Int,
    UInt,
    Long,
    ULong,
    LongLong,
    ULongLong,
    Float,
    Double,
}

impl BaseType {
    pub fn spelling(self) -> &'static str {
        match self {
            BaseType::Char => "char",
            BaseType::SChar => "signed char",
            BaseType::UChar => "unsigned char",
            BaseType::Short => "short",
            BaseType::UShort => "unsigned short",
            BaseType::Int => "int",
            BaseType::UInt => "unsigned int",
            BaseType::Long => "long",
            BaseType::ULong => "unsigned long",
            BaseType::LongLong => "long long",
            BaseType::ULongLong => "unsigned long long",
            BaseType::Float => "float",
            BaseType::Double => "double",
        }
    }

    pub fn is_floating(self) -> bool {
        matches!(self, BaseType::Float | BaseType::Double)
    }

    pub fn is_unsigned(self) -> bool {
        matches!(
            self,
            BaseType::UChar | BaseType::UShort | BaseType::UInt | BaseType::ULong | BaseType::ULongLong
        )
    }

    /// `printf` conversion that prints a value of this type exactly.
    pub fn printf_format(self) -> &'static str {
        match self {
            BaseType::Char | BaseType::SChar | BaseType::Short | BaseType::Int => "%d",
            BaseType::UChar | BaseType::UShort | BaseType::UInt => "%u",
            BaseType::Long => "%ld",
            BaseType::ULong => "%lu",
            BaseType::LongLong => "%lld",
            BaseType::ULongLong => "%llu",
            BaseType::Float | BaseType::Double => "%.6f",
        }
    }

    pub const ALL: [BaseType; 13] = [
        BaseType::Char,
        BaseType::SChar,
        BaseType::UChar,
        BaseType::Short,
        BaseType::UShort,
        BaseType::Int,
        BaseType::UInt,
        BaseType::Long,
        BaseType::ULong,
        BaseType::LongLong,
        BaseType::ULongLong,
        BaseType::Float,
        BaseType::Double,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivation {
    None,
    Array(u32),
    Pointer { depth: u8, const_target: bool },
}

/// A MiniC object type. Equality is structural.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CType {
    pub base: BaseType,
    pub derivation: Derivation,
}

impl CType {
    pub const fn scalar(base: BaseType) -> Self {
        CType { base, derivation: Derivation::None }
    }

    pub const fn array(base: BaseType, len: u32) -> Self {
        CType { base, derivation: Derivation::Array(len) }
    }

    pub const fn pointer(base: BaseType, depth: u8) -> Self {
        CType { base, derivation: Derivation::Pointer { depth, const_target: false } }
    }

    pub const INT: CType = CType::scalar(BaseType::Int);
    pub const DOUBLE: CType = CType::scalar(BaseType::Double);

    pub fn is_scalar(&self) -> bool {
        self.derivation == Derivation::None
    }

    pub fn is_floating(&self) -> bool {
        self.is_scalar() && self.base.is_floating()
    }

    pub fn is_pointer(&self) -> bool {
        matches!(self.derivation, Derivation::Pointer { .. })
    }

    pub fn is_array(&self) -> bool {
        matches!(self.derivation, Derivation::Array(_))
    }

    /// Type of `x[i]` or `*x`.
    pub fn element(&self) -> Option<CType> {
        match self.derivation {
            Derivation::None => None,
            Derivation::Array(_) => Some(CType::scalar(self.base)),
            Derivation::Pointer { depth: 1, .. } => Some(CType::scalar(self.base)),
            Derivation::Pointer { depth, const_target } => Some(CType {
                base: self.base,
                derivation: Derivation::Pointer { depth: depth - 1, const_target },
            }),
        }
    }

    /// Type of `&x`. Arrays and deeper pointers are flattened to one more level.
    pub fn address_of(&self) -> CType {
        match self.derivation {
            Derivation::None | Derivation::Array(_) => CType::pointer(self.base, 1),
            Derivation::Pointer { depth, const_target } => CType {
                base: self.base,
                derivation: Derivation::Pointer { depth: depth.saturating_add(1), const_target },
            },
        }
    }

    /// Renders a declarator such as `const double **p` or `int a[8]`.
    pub fn declare(&self, name: &str) -> String {
        match self.derivation {
            Derivation::None => format!("{} {}", self.base.spelling(), name),
            Derivation::Array(n) => format!("{} {}[{}]", self.base.spelling(), name, n),
            Derivation::Pointer { depth, const_target } => {
                let mut s = String::new();
                if const_target {
                    s.push_str("const ");
                }
                s.push_str(self.base.spelling());
                s.push(' ');
                for _ in 0..depth {
                    s.push('*');
                }
                s.push_str(name);
                s
            }
        }
    }
}

impl fmt::Display for CType {
    /// Abstract type name, e.g. `double`, `int[8]`, `const char *`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.derivation {
            Derivation::None => f.write_str(self.base.spelling()),
            Derivation::Array(n) => write!(f, "{}[{}]", self.base.spelling(), n),
            Derivation::Pointer { depth, const_target } => {
                if const_target {
                    f.write_str("const ")?;
                }
                f.write_str(self.base.spelling())?;
                f.write_str(" ")?;
                for _ in 0..depth {
                    f.write_str("*")?;
                }
                Ok(())
            }
        }
    }
}
