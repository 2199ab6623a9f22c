//! Complex amplitude literals.
//!
//! The accepted grammar is
//!
//! ```text
//! amp  ::= part | part ('+'|'-') part 'i' | part 'i'
//! part ::= ['-'] int [ '/' int | '/sqrt(' int ')' | '/(' int '*sqrt(' int '))' ]
//! ```
//!
//! Whitespace is allowed between tokens. Values are evaluated in double
//! precision, and [`render_amplitude`] emits text that parses back to the
//! same bits for every amplitude whose components are zero or have
//! magnitude above roughly `1e-290`.

use num_complex::Complex64;
use thiserror::Error;

/// Complex transition amplitude.
pub type Amplitude = Complex64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmplitudeError {
    #[error("amplitude syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("division by zero at byte {offset}")]
    DivisionByZero { offset: usize },
    #[error("sqrt argument must be >= 1 (byte {offset})")]
    BadSqrt { offset: usize },
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), AmplitudeError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{token}`")))
        }
    }

    fn syntax(&self, message: impl Into<String>) -> AmplitudeError {
        AmplitudeError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    /// Returns the integer's value and its starting offset.
    fn int(&mut self) -> Result<(f64, usize), AmplitudeError> {
        self.skip_ws();
        let start = self.pos;
        let digits = self.text[start..].bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.syntax("expected an integer"));
        }
        self.pos += digits;
        // Decimal parsing rounds correctly, so every integer below 2^53 and
        // every power of two is read exactly.
        let value = self.text[start..self.pos]
            .parse::<f64>()
            .map_err(|e| AmplitudeError::Syntax {
                offset: start,
                message: e.to_string(),
            })?;
        Ok((value, start))
    }

    fn part(&mut self) -> Result<f64, AmplitudeError> {
        let negative = self.eat("-");
        let (numerator, _) = self.int()?;
        let mut value = numerator;
        if self.eat("/") {
            self.skip_ws();
            if self.eat("sqrt(") {
                let radicand = self.sqrt_arg()?;
                value = numerator / radicand;
            } else if self.eat("(") {
                let (q, at) = self.int()?;
                if q == 0.0 {
                    return Err(AmplitudeError::DivisionByZero { offset: at });
                }
                self.expect("*")?;
                self.expect("sqrt(")?;
                let radicand = self.sqrt_arg()?;
                self.expect(")")?;
                value = numerator / (q * radicand);
            } else {
                let (q, at) = self.int()?;
                if q == 0.0 {
                    return Err(AmplitudeError::DivisionByZero { offset: at });
                }
                value = numerator / q;
            }
        }
        Ok(if negative { -value } else { value })
    }

    /// Parses `int ')'` after `sqrt(` and returns the square root.
    fn sqrt_arg(&mut self) -> Result<f64, AmplitudeError> {
        let (r, at) = self.int()?;
        if r < 1.0 {
            return Err(AmplitudeError::BadSqrt { offset: at });
        }
        self.expect(")")?;
        Ok(r.sqrt())
    }

    fn finish(&mut self) -> Result<(), AmplitudeError> {
        self.skip_ws();
        if self.pos == self.text.len() {
            Ok(())
        } else {
            Err(self.syntax("unexpected trailing input"))
        }
    }
}

/// Parses an amplitude literal.
pub fn parse_amplitude(text: &str) -> Result<Amplitude, AmplitudeError> {
    let mut cur = Cursor { text, pos: 0 };
    let first = cur.part()?;
    if cur.eat("i") {
        cur.finish()?;
        return Ok(Complex64::new(0.0, first));
    }
    cur.skip_ws();
    if cur.pos == text.len() {
        return Ok(Complex64::new(first, 0.0));
    }
    let sign = if cur.eat("+") {
        1.0
    } else if cur.eat("-") {
        -1.0
    } else {
        return Err(cur.syntax("expected `+`, `-`, `i` or end of input"));
    };
    let second = cur.part()?;
    cur.expect("i")?;
    cur.finish()?;
    Ok(Complex64::new(first, sign * second))
}

/// Renders an amplitude in the literal grammar.
pub fn render_amplitude(a: Amplitude) -> String {
    match (a.re == 0.0, a.im == 0.0) {
        (_, true) => render_part(a.re),
        (true, false) => format!("{} i", render_part(a.im)),
        (false, false) => {
            let op = if a.im.is_sign_negative() { '-' } else { '+' };
            format!("{} {} {} i", render_part(a.re), op, render_part(a.im.abs()))
        }
    }
}

const EXACT_INT: f64 = 9_007_199_254_740_992.0; // 2^53

fn render_part(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sign = if x < 0.0 { "-" } else { "" };
    format!("{sign}{}", render_magnitude(x.abs()))
}

fn render_magnitude(a: f64) -> String {
    if a.fract() == 0.0 && a < EXACT_INT {
        return format!("{a:.0}");
    }
    for q in 2..=64u32 {
        let q = f64::from(q);
        let p = (a * q).round();
        if (1.0..EXACT_INT).contains(&p) && p / q == a {
            return format!("{p:.0}/{q:.0}");
        }
    }
    for r in 2..=64u32 {
        let root = f64::from(r).sqrt();
        if root.fract() == 0.0 {
            continue;
        }
        let p = (a * root).round();
        if (1.0..EXACT_INT).contains(&p) && p / root == a {
            return format!("{p:.0}/sqrt({r})");
        }
        for q in 2..=8u32 {
            let q = f64::from(q);
            let p = (a * q * root).round();
            if (1.0..EXACT_INT).contains(&p) && p / (q * root) == a {
                return format!("{p:.0}/({q:.0}*sqrt({r}))");
            }
        }
    }
    dyadic(a)
}

/// Exact `m/2^k` form of a finite positive double.
fn dyadic(a: f64) -> String {
    let bits = a.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i32;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mut mantissa, mut exp) = if exponent == 0 {
        (fraction, -1074)
    } else {
        (fraction | (1u64 << 52), exponent - 1075)
    };
    while mantissa & 1 == 0 && exp < 0 {
        mantissa >>= 1;
        exp += 1;
    }
    if exp >= 0 {
        return format!("{a:.0}");
    }
    // Denominators beyond 2^1023 overflow; shed low mantissa bits instead.
    while exp < -1023 {
        mantissa >>= 1;
        exp += 1;
    }
    format!("{mantissa}/{:.0}", 2f64.powi(-exp))
}
