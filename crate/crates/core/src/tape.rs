//! Sparse two-way infinite tape.

use std::fmt;

use serde::{Serialize, Serializer};

/// A single tape symbol. Symbols are single characters; `_` is the blank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub char);

impl Symbol {
    pub const BLANK: Symbol = Symbol('_');

    pub fn is_blank(self) -> bool {
        self == Self::BLANK
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Head movement of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    L,
    N,
    R,
}

impl Move {
    pub fn offset(self) -> i64 {
        match self {
            Move::L => -1,
            Move::N => 0,
            Move::R => 1,
        }
    }

    pub fn parse(token: &str) -> Option<Move> {
        match token {
            "L" => Some(Move::L),
            "N" => Some(Move::N),
            "R" => Some(Move::R),
            _ => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Move::L => 'L',
            Move::N => 'N',
            Move::R => 'R',
        };
        write!(f, "{c}")
    }
}

/// Tape content in canonical form: the cells from the leftmost to the
/// rightmost non-blank symbol, anchored at `origin`. A blank tape has no
/// cells and origin 0, so structural equality is content equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tape {
    origin: i64,
    cells: Vec<Symbol>,
}

impl Tape {
    pub fn blank() -> Self {
        Self::default()
    }

    /// Lays `symbols` on cells `0..symbols.len()`.
    pub fn from_symbols(symbols: &[Symbol]) -> Self {
        Self::from_cells(0, symbols.to_vec())
    }

    /// Builds a tape whose cell `origin + i` holds `cells[i]`.
    pub fn from_cells(origin: i64, cells: Vec<Symbol>) -> Self {
        let mut tape = Tape { origin, cells };
        tape.canonicalize();
        tape
    }

    pub fn read(&self, cell: i64) -> Symbol {
        let idx = cell - self.origin;
        if idx < 0 {
            return Symbol::BLANK;
        }
        self.cells.get(idx as usize).copied().unwrap_or(Symbol::BLANK)
    }

    pub fn write(&mut self, cell: i64, symbol: Symbol) {
        if self.read(cell) == symbol {
            return;
        }
        if self.cells.is_empty() {
            self.origin = cell;
            self.cells.push(symbol);
            return;
        }
        if cell < self.origin {
            let grow = (self.origin - cell) as usize;
            self.cells.splice(0..0, std::iter::repeat_n(Symbol::BLANK, grow));
            self.origin = cell;
        }
        let idx = (cell - self.origin) as usize;
        if idx >= self.cells.len() {
            self.cells.resize(idx + 1, Symbol::BLANK);
        }
        self.cells[idx] = symbol;
        self.canonicalize();
    }

    /// Same content with `cell` overwritten.
    pub fn with(&self, cell: i64, symbol: Symbol) -> Tape {
        let mut t = self.clone();
        t.write(cell, symbol);
        t
    }

    /// Same content moved `offset` cells to the right.
    pub fn shifted(&self, offset: i64) -> Tape {
        if self.cells.is_empty() {
            return Tape::blank();
        }
        Tape {
            origin: self.origin + offset,
            cells: self.cells.clone(),
        }
    }

    /// Leftmost non-blank cell, or `None` for a blank tape.
    pub fn origin(&self) -> Option<i64> {
        (!self.cells.is_empty()).then_some(self.origin)
    }

    /// Canonical cells starting at [`Tape::origin`].
    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    pub fn is_blank(&self) -> bool {
        self.cells.is_empty()
    }

    /// Number of non-blank cells.
    pub fn footprint(&self) -> usize {
        self.cells.iter().filter(|s| !s.is_blank()).count()
    }

    /// Iterates `(cell, symbol)` over non-blank cells.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Symbol)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_blank())
            .map(|(i, s)| (self.origin + i as i64, *s))
    }

    fn canonicalize(&mut self) {
        let lead = self.cells.iter().take_while(|s| s.is_blank()).count();
        if lead == self.cells.len() {
            self.cells.clear();
            self.origin = 0;
            return;
        }
        if lead > 0 {
            self.cells.drain(..lead);
            self.origin += lead as i64;
        }
        while self.cells.last().is_some_and(|s| s.is_blank()) {
            self.cells.pop();
        }
    }
}

impl fmt::Display for Tape {
    /// `cells@origin`, or `_` for the blank tape.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cells.is_empty() {
            return write!(f, "_");
        }
        for s in &self.cells {
            write!(f, "{s}")?;
        }
        write!(f, "@{}", self.origin)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_char(self.0)
    }
}

impl Serialize for Move {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl Serialize for Tape {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Tape", 2)?;
        st.serialize_field("origin", &self.origin)?;
        let cells: String = self.cells.iter().map(|s| s.0).collect();
        st.serialize_field("cells", &cells)?;
        st.end()
    }
}
