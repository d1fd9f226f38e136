use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ProtocolError;

/// The built-in catalog of outsourceable functions. All are pure and
/// deterministic, so the TTP's recomputation always agrees with an honest
/// cloud.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskFunction {
    /// `SHA-256` applied `rounds` times to the input bytes.
    IteratedHash { rounds: u32 },
    /// An integer expression in the variable `x` (the input, parsed as a
    /// decimal `u64`). Supports `+ - * / %`, parentheses and decimal
    /// literals; arithmetic wraps modulo 2^64, division by zero yields 0.
    ArithmeticExpression { expr: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub function: TaskFunction,
    pub input: String,
}

impl Task {
    pub fn iterated_hash(rounds: u32, input: impl Into<String>) -> Self {
        Task { function: TaskFunction::IteratedHash { rounds }, input: input.into() }
    }

    pub fn arithmetic(expr: impl Into<String>, x: u64) -> Self {
        Task { function: TaskFunction::ArithmeticExpression { expr: expr.into() }, input: x.to_string() }
    }

    /// Canonical bytes of the function description (what `com_f` commits to).
    pub fn function_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&self.function).expect("task function serializes")
    }

    pub fn input_bytes(&self) -> Vec<u8> {
        self.input.as_bytes().to_vec()
    }

    pub fn evaluate(&self) -> Result<Vec<u8>, ProtocolError> {
        match &self.function {
            TaskFunction::IteratedHash { rounds } => {
                let mut acc = self.input_bytes();
                for _ in 0..*rounds {
                    acc = Sha256::digest(&acc).to_vec();
                }
                Ok(acc)
            }
            TaskFunction::ArithmeticExpression { expr } => {
                let x: u64 = self
                    .input
                    .trim()
                    .parse()
                    .map_err(|_| ProtocolError::Task(format!("input {:?} is not a u64", self.input)))?;
                Ok(eval(expr, x)?.to_string().into_bytes())
            }
        }
    }
}

impl Default for Task {
    fn default() -> Self {
        Task::iterated_hash(1000, "hello, cloud")
    }
}

fn eval(expr: &str, x: u64) -> Result<u64, ProtocolError> {
    let mut p = Parser { s: expr.as_bytes(), i: 0, x };
    let v = p.sum()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

/// Recursive descent: sum := product (('+'|'-') product)*, and so on.
struct Parser<'a> {
    s: &'a [u8],
    i: usize,
    x: u64,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> ProtocolError {
        ProtocolError::Task(format!("expression: {what} at offset {}", self.i))
    }

    fn ws(&mut self) {
        while self.s.get(self.i).is_some_and(|c| c.is_ascii_whitespace()) {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn sum(&mut self) -> Result<u64, ProtocolError> {
        let mut v = self.product()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.i += 1;
            let r = self.product()?;
            v = if op == b'+' { v.wrapping_add(r) } else { v.wrapping_sub(r) };
        }
        Ok(v)
    }

    fn product(&mut self) -> Result<u64, ProtocolError> {
        let mut v = self.atom()?;
        while let Some(op @ (b'*' | b'/' | b'%')) = self.peek() {
            self.i += 1;
            let r = self.atom()?;
            v = match op {
                b'*' => v.wrapping_mul(r),
                b'/' => v.checked_div(r).unwrap_or(0),
                _ => v.checked_rem(r).unwrap_or(0),
            };
        }
        Ok(v)
    }

    fn atom(&mut self) -> Result<u64, ProtocolError> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.i += 1;
                Ok(v)
            }
            Some(b'x') => {
                self.i += 1;
                Ok(self.x)
            }
            Some(b'-') => {
                self.i += 1;
                Ok(self.atom()?.wrapping_neg())
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.i;
                while self.s.get(self.i).is_some_and(u8::is_ascii_digit) {
                    self.i += 1;
                }
                std::str::from_utf8(&self.s[start..self.i])
                    .expect("ascii digits")
                    .parse()
                    .map_err(|_| self.err("literal out of range"))
            }
            _ => Err(self.err("expected a number, 'x' or '('")),
        }
    }
}
