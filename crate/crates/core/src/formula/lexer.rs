use std::ops::Range;

use super::{FormulaError, Reference};
use crate::workbook::{col_from_letters, MAX_COL, MAX_ROW};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Number(String),
    Str(String),
    Bool(bool),
    ErrorLit(String),
    Func(String),
    Name(String),
    Ref(Reference),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
    Colon,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Range<usize>,
}

const OPS: [&str; 13] = ["<>", "<=", ">=", "+", "-", "*", "/", "^", "%", "&", "=", "<", ">"];
const ERROR_LITERALS: [&str; 7] = ["#DIV/0!", "#N/A", "#NAME?", "#NULL!", "#NUM!", "#REF!", "#VALUE!"];

fn is_word_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$' || c == '\\'
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '$')
}

/// `$A$1`, `A1`, `$AA10` → reference with no sheet.
pub(crate) fn cell_ref(word: &str) -> Option<Reference> {
    let (col_abs, rest) = match word.strip_prefix('$') {
        Some(r) => (true, r),
        None => (false, word),
    };
    let letters_end = rest.find(|c: char| !c.is_ascii_alphabetic())?;
    let (letters, rest) = rest.split_at(letters_end);
    let (row_abs, digits) = match rest.strip_prefix('$') {
        Some(r) => (true, r),
        None => (false, rest),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let col = col_from_letters(letters)?;
    let row: u32 = digits.parse().ok()?;
    if col > MAX_COL || row == 0 || row > MAX_ROW {
        return None;
    }
    Some(Reference {
        sheet: None,
        col,
        row,
        col_abs,
        row_abs,
    })
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    out: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.src.get(self.pos + offset..)?.chars().next()
    }

    fn push(&mut self, tok: Tok, start: usize) {
        self.out.push(Token {
            tok,
            span: start..self.pos,
        });
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn skip_ws(&mut self) {
        self.take_while(char::is_whitespace);
    }

    fn run(mut self) -> Result<Vec<Token>, FormulaError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                c if c.is_whitespace() => self.skip_ws(),
                '"' => self.string(start)?,
                '\'' => self.quoted_sheet(start)?,
                '[' => return Err(FormulaError::ExternalReference { offset: start }),
                '#' => self.error_literal(start)?,
                '(' => {
                    self.pos += 1;
                    self.push(Tok::LParen, start);
                }
                ')' => {
                    self.pos += 1;
                    self.push(Tok::RParen, start);
                }
                ',' => {
                    self.pos += 1;
                    self.push(Tok::Comma, start);
                }
                ':' => {
                    self.pos += 1;
                    self.push(Tok::Colon, start);
                }
                '!' => return Err(FormulaError::DanglingBang { offset: start }),
                c if c.is_ascii_digit() || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) => {
                    self.number(start)
                }
                c if is_word_start(c) => self.word(start)?,
                _ => {
                    let op = OPS.iter().find(|op| self.src[self.pos..].starts_with(**op));
                    match op {
                        Some(op) => {
                            self.pos += op.len();
                            self.push(Tok::Op(op), start);
                        }
                        None => return Err(FormulaError::UnexpectedChar { ch: c, offset: start }),
                    }
                }
            }
        }
        Ok(self.out)
    }

    fn string(&mut self, start: usize) -> Result<(), FormulaError> {
        self.pos += 1;
        loop {
            match self.peek() {
                None => return Err(FormulaError::UnterminatedString { offset: start }),
                Some('"') if self.peek_at(1) == Some('"') => self.pos += 2,
                Some('"') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => self.pos += c.len_utf8(),
            }
        }
        let raw = self.src[start..self.pos].to_string();
        self.push(Tok::Str(raw), start);
        Ok(())
    }

    fn number(&mut self, start: usize) {
        self.take_while(|c| c.is_ascii_digit() || c == '.');
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.take_while(|c| c.is_ascii_digit()).is_empty() {
                self.pos = save;
            }
        }
        let text = self.src[start..self.pos].to_string();
        self.push(Tok::Number(text), start);
    }

    fn error_literal(&mut self, start: usize) -> Result<(), FormulaError> {
        let rest = self.src[self.pos..].to_ascii_uppercase();
        match ERROR_LITERALS.iter().find(|lit| rest.starts_with(**lit)) {
            Some(lit) => {
                self.pos += lit.len();
                self.push(Tok::ErrorLit(lit.to_string()), start);
                Ok(())
            }
            None => Err(FormulaError::UnexpectedChar { ch: '#', offset: start }),
        }
    }

    fn quoted_sheet(&mut self, start: usize) -> Result<(), FormulaError> {
        self.pos += 1;
        let mut name = String::new();
        loop {
            match self.peek() {
                None => return Err(FormulaError::UnterminatedSheetName { offset: start }),
                Some('\'') if self.peek_at(1) == Some('\'') => {
                    name.push('\'');
                    self.pos += 2;
                }
                Some('\'') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => {
                    name.push(c);
                    self.pos += c.len_utf8();
                }
            }
        }
        if self.peek() != Some('!') {
            return Err(FormulaError::UnterminatedSheetName { offset: start });
        }
        if name.starts_with('[') {
            return Err(FormulaError::ExternalReference { offset: start });
        }
        if name.contains(':') {
            return Err(FormulaError::ThreeDReference { offset: start });
        }
        if name.is_empty() {
            return Err(FormulaError::DanglingBang { offset: self.pos });
        }
        self.pos += 1;
        self.qualified_cell(name, start)
    }

    /// After `Sheet!`: the cell part must follow immediately.
    fn qualified_cell(&mut self, sheet: String, start: usize) -> Result<(), FormulaError> {
        let bang = self.pos - 1;
        let word = self.take_while(is_word_char);
        match cell_ref(word) {
            Some(mut r) => {
                r.sheet = Some(sheet);
                self.push(Tok::Ref(r), start);
                Ok(())
            }
            None => Err(FormulaError::DanglingBang { offset: bang }),
        }
    }

    fn word(&mut self, start: usize) -> Result<(), FormulaError> {
        let word = self.take_while(|c| is_word_char(c) || c == '\\');
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                return self.qualified_cell(word.to_string(), start);
            }
            Some(':') => {
                // `Sheet1:Sheet3!A1`
                let save = self.pos;
                self.pos += 1;
                let next = self.take_while(is_word_char);
                let is_3d = !next.is_empty() && self.peek() == Some('!');
                self.pos = save;
                if is_3d && cell_ref(word).is_none() {
                    return Err(FormulaError::ThreeDReference { offset: start });
                }
            }
            _ => {}
        }
        let lookahead = self.src[self.pos..].trim_start().starts_with('(');
        let tok = if lookahead {
            Tok::Func(word.to_string())
        } else if let Some(r) = cell_ref(word) {
            Tok::Ref(r)
        } else if word.eq_ignore_ascii_case("TRUE") {
            Tok::Bool(true)
        } else if word.eq_ignore_ascii_case("FALSE") {
            Tok::Bool(false)
        } else {
            Tok::Name(word.to_string())
        };
        self.push(tok, start);
        Ok(())
    }
}

/// Tokenize the body of a formula (everything after the leading `=`).
/// Spans are byte offsets into the full source, `=` included.
pub(crate) fn tokenize(source: &str) -> Result<Vec<Token>, FormulaError> {
    if !source.starts_with('=') {
        return Err(FormulaError::MissingEquals);
    }
    Lexer {
        src: source,
        pos: 1,
        out: Vec::new(),
    }
    .run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn functions_names_and_refs() {
        let toks = kinds("=SUM(A1, LOG10(2), Profit, TRUE)");
        assert!(matches!(&toks[0], Tok::Func(f) if f == "SUM"));
        assert!(matches!(&toks[2], Tok::Ref(r) if r.col == 1 && r.row == 1));
        assert!(matches!(&toks[4], Tok::Func(f) if f == "LOG10"));
        assert!(matches!(&toks[9], Tok::Name(n) if n == "Profit"));
        assert!(matches!(&toks[11], Tok::Bool(true)));
    }

    #[test]
    fn four_letter_columns_are_names() {
        assert!(matches!(&kinds("=ABCD1")[0], Tok::Name(_)));
        assert!(matches!(&kinds("=XFE1")[0], Tok::Name(_)));
        assert!(matches!(&kinds("=XFD1")[0], Tok::Ref(_)));
    }

    #[test]
    fn absolute_markers() {
        let r = cell_ref("$B7").unwrap();
        assert!(r.col_abs && !r.row_abs);
        let r = cell_ref("B$7").unwrap();
        assert!(!r.col_abs && r.row_abs);
        assert!(cell_ref("B0").is_none());
        assert!(cell_ref("$$B7").is_none());
    }

    #[test]
    fn exponent_numbers_and_error_literals() {
        assert_eq!(kinds("=1.5E3"), vec![Tok::Number("1.5E3".into())]);
        assert_eq!(kinds("=#REF!+1")[0], Tok::ErrorLit("#REF!".into()));
    }
}
