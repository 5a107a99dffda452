//! SQL subset frontend: SELECT over registered event tables, with
//! DIRECTLYFOLLOWS as a table operator.
//!
//! Grammar:
//! ```text
//! query   := SELECT '*' FROM DIRECTLYFOLLOWS '(' select ')' [';']
//!          | select [';']
//! select  := SELECT proj FROM ident [WHERE pred {AND pred}]
//! proj    := '*' | ident ',' ident ',' ident
//! pred    := ident cmp literal          cmp in { = < <= > >= }
//! literal := 'string' | integer
//! ```
//! Keywords are case-insensitive; identifiers may be bare or double-quoted;
//! string literals are single-quoted; time literals are integers (epoch
//! microseconds) or ISO-8601 strings.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::dfr::directly_follows;
use crate::event_model::{dfr_to_rows, Event, EventLog};
use crate::ingestion::{parse_timestamp, TimeFormat};

// ---------------------------------------------------------------------------
// AST

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    Star,
    Columns(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Eq => "=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Str(String),
    Int(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub column: String,
    pub op: Comparator,
    pub literal: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseSelect {
    pub table: String,
    pub projection: Projection,
    pub predicates: Vec<Predicate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryAst {
    Base(BaseSelect),
    DfWrap(BaseSelect),
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Select,
    From,
    Where,
    And,
    DirectlyFollows,
    Star,
    LParen,
    RParen,
    Comma,
    Semi,
    Cmp(Comparator),
    Ident(String),
    Str(String),
    Int(i64),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Select => "SELECT".into(),
            Tok::From => "FROM".into(),
            Tok::Where => "WHERE".into(),
            Tok::And => "AND".into(),
            Tok::DirectlyFollows => "DIRECTLYFOLLOWS".into(),
            Tok::Star => "`*`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Cmp(c) => format!("`{c}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Int(_) => "integer literal".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

struct Lexer<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(input: &'a str) -> Self {
        Lexer { input, pos: 0 }
    }

    fn rest(&self) -> &str {
        &self.input[self.pos..]
    }

    fn next_token(&mut self) -> Result<(Tok, usize), ParseError> {
        while self
            .rest()
            .chars()
            .next()
            .map(|c| c.is_whitespace())
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        let start = self.pos;
        let mut chars = self.rest().chars();
        let c = match chars.next() {
            None => return Ok((Tok::Eof, start)),
            Some(c) => c,
        };
        let tok = match c {
            '*' => {
                self.pos += 1;
                Tok::Star
            }
            '(' => {
                self.pos += 1;
                Tok::LParen
            }
            ')' => {
                self.pos += 1;
                Tok::RParen
            }
            ',' => {
                self.pos += 1;
                Tok::Comma
            }
            ';' => {
                self.pos += 1;
                Tok::Semi
            }
            '=' => {
                self.pos += 1;
                Tok::Cmp(Comparator::Eq)
            }
            '<' => {
                self.pos += 1;
                if self.rest().starts_with('=') {
                    self.pos += 1;
                    Tok::Cmp(Comparator::Le)
                } else {
                    Tok::Cmp(Comparator::Lt)
                }
            }
            '>' => {
                self.pos += 1;
                if self.rest().starts_with('=') {
                    self.pos += 1;
                    Tok::Cmp(Comparator::Ge)
                } else {
                    Tok::Cmp(Comparator::Gt)
                }
            }
            '\'' => {
                self.pos += 1;
                let mut value = String::new();
                loop {
                    match self.rest().chars().next() {
                        None => {
                            return Err(ParseError {
                                offset: start,
                                expected: vec!["closing `'`".into()],
                                found: "end of input".into(),
                            })
                        }
                        Some('\'') => {
                            self.pos += 1;
                            // '' escapes a quote inside the literal
                            if self.rest().starts_with('\'') {
                                value.push('\'');
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                        Some(ch) => {
                            value.push(ch);
                            self.pos += ch.len_utf8();
                        }
                    }
                }
                Tok::Str(value)
            }
            '"' => {
                self.pos += 1;
                let mut value = String::new();
                loop {
                    match self.rest().chars().next() {
                        None => {
                            return Err(ParseError {
                                offset: start,
                                expected: vec!["closing `\"`".into()],
                                found: "end of input".into(),
                            })
                        }
                        Some('"') => {
                            self.pos += 1;
                            break;
                        }
                        Some(ch) => {
                            value.push(ch);
                            self.pos += ch.len_utf8();
                        }
                    }
                }
                Tok::Ident(value)
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut end = self.pos + 1;
                while self.input[end..]
                    .chars()
                    .next()
                    .map(|c| c.is_ascii_digit())
                    .unwrap_or(false)
                {
                    end += 1;
                }
                let text = &self.input[self.pos..end];
                let value = text.parse::<i64>().map_err(|_| ParseError {
                    offset: start,
                    expected: vec!["integer literal".into()],
                    found: format!("`{text}`"),
                })?;
                self.pos = end;
                Tok::Int(value)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut end = self.pos;
                for ch in self.rest().chars() {
                    if ch.is_alphanumeric() || ch == '_' {
                        end += ch.len_utf8();
                    } else {
                        break;
                    }
                }
                let word = &self.input[self.pos..end];
                self.pos = end;
                match word.to_ascii_uppercase().as_str() {
                    "SELECT" => Tok::Select,
                    "FROM" => Tok::From,
                    "WHERE" => Tok::Where,
                    "AND" => Tok::And,
                    "DIRECTLYFOLLOWS" => Tok::DirectlyFollows,
                    _ => Tok::Ident(word.to_string()),
                }
            }
            other => {
                return Err(ParseError {
                    offset: start,
                    expected: vec!["a token".into()],
                    found: format!("`{other}`"),
                })
            }
        };
        Ok((tok, start))
    }
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, usize) {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &[&str]) -> ParseError {
        let (tok, offset) = self.peek();
        ParseError {
            offset: *offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.describe(),
        }
    }

    fn expect(&mut self, want: Tok, label: &str) -> Result<(), ParseError> {
        if self.peek().0 == want {
            self.advance();
            Ok(())
        } else {
            Err(self.err(&[label]))
        }
    }

    fn ident(&mut self, label: &str) -> Result<String, ParseError> {
        match self.peek().0.clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            _ => Err(self.err(&[label])),
        }
    }

    fn query(&mut self) -> Result<QueryAst, ParseError> {
        self.expect(Tok::Select, "SELECT")?;
        let ast = if self.peek().0 == Tok::Star {
            self.advance();
            self.expect(Tok::From, "FROM")?;
            if self.peek().0 == Tok::DirectlyFollows {
                self.advance();
                self.expect(Tok::LParen, "`(`")?;
                let inner = self.select()?;
                self.expect(Tok::RParen, "`)`")?;
                QueryAst::DfWrap(inner)
            } else {
                QueryAst::Base(self.select_tail(Projection::Star)?)
            }
        } else {
            let proj = self.projection()?;
            self.expect(Tok::From, "FROM")?;
            QueryAst::Base(self.select_tail(proj)?)
        };
        if self.peek().0 == Tok::Semi {
            self.advance();
        }
        if self.peek().0 != Tok::Eof {
            return Err(self.err(&["end of input"]));
        }
        Ok(ast)
    }

    fn select(&mut self) -> Result<BaseSelect, ParseError> {
        self.expect(Tok::Select, "SELECT")?;
        let proj = if self.peek().0 == Tok::Star {
            self.advance();
            Projection::Star
        } else {
            self.projection()?
        };
        self.expect(Tok::From, "FROM")?;
        self.select_tail(proj)
    }

    fn projection(&mut self) -> Result<Projection, ParseError> {
        let mut columns = vec![self.ident("column name or `*`")?];
        while self.peek().0 == Tok::Comma {
            self.advance();
            columns.push(self.ident("column name")?);
        }
        Ok(Projection::Columns(columns))
    }

    fn select_tail(&mut self, projection: Projection) -> Result<BaseSelect, ParseError> {
        let table = self.ident("table name")?;
        let mut predicates = Vec::new();
        if self.peek().0 == Tok::Where {
            self.advance();
            predicates.push(self.predicate()?);
            while self.peek().0 == Tok::And {
                self.advance();
                predicates.push(self.predicate()?);
            }
        }
        Ok(BaseSelect {
            table,
            projection,
            predicates,
        })
    }

    fn predicate(&mut self) -> Result<Predicate, ParseError> {
        let column = self.ident("column name")?;
        let op = match self.peek().0 {
            Tok::Cmp(c) => {
                self.advance();
                c
            }
            _ => return Err(self.err(&["comparison operator"])),
        };
        let literal = match self.peek().0.clone() {
            Tok::Str(s) => {
                self.advance();
                Literal::Str(s)
            }
            Tok::Int(i) => {
                self.advance();
                Literal::Int(i)
            }
            _ => return Err(self.err(&["string literal", "integer literal"])),
        };
        Ok(Predicate {
            column,
            op,
            literal,
        })
    }
}

/// Parses one query. Trailing garbage is rejected; errors carry the byte
/// offset and the expected-token set.
pub fn parse(text: &str) -> Result<QueryAst, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    loop {
        let (tok, offset) = lexer.next_token()?;
        let eof = tok == Tok::Eof;
        tokens.push((tok, offset));
        if eof {
            break;
        }
    }
    Parser { tokens, pos: 0 }.query()
}

fn render_ident(name: &str) -> String {
    let bare = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
        && name.chars().next().map(|c| !c.is_ascii_digit()).unwrap_or(false)
        && !matches!(
            name.to_ascii_uppercase().as_str(),
            "SELECT" | "FROM" | "WHERE" | "AND" | "DIRECTLYFOLLOWS"
        );
    if bare {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

fn render_select(s: &BaseSelect) -> String {
    let proj = match &s.projection {
        Projection::Star => "*".to_string(),
        Projection::Columns(cols) => cols
            .iter()
            .map(|c| render_ident(c))
            .collect::<Vec<_>>()
            .join(", "),
    };
    let mut out = format!("SELECT {proj} FROM {}", render_ident(&s.table));
    for (i, p) in s.predicates.iter().enumerate() {
        let lit = match &p.literal {
            Literal::Str(v) => format!("'{}'", v.replace('\'', "''")),
            Literal::Int(v) => v.to_string(),
        };
        let joiner = if i == 0 { "WHERE" } else { "AND" };
        out.push_str(&format!(" {joiner} {} {} {lit}", render_ident(&p.column), p.op));
    }
    out
}

/// Canonical text form; `parse(render(ast)) == ast` on the supported grammar.
pub fn render(ast: &QueryAst) -> String {
    match ast {
        QueryAst::Base(s) => render_select(s),
        QueryAst::DfWrap(s) => format!("SELECT * FROM DIRECTLYFOLLOWS ({})", render_select(s)),
    }
}

// ---------------------------------------------------------------------------
// Catalog and execution

/// A registered event table: the log plus the declared names of its three
/// role columns.
#[derive(Debug, Clone)]
pub struct TableDef {
    pub log: EventLog,
    pub case_column: String,
    pub activity_column: String,
    pub time_column: String,
}

/// Table registry; names are case-insensitive.
#[derive(Debug, Default, Clone)]
pub struct Catalog {
    tables: HashMap<String, TableDef>,
}

impl Catalog {
    pub fn new() -> Self {
        Catalog::default()
    }

    pub fn register(&mut self, name: &str, def: TableDef) {
        self.tables.insert(name.to_ascii_lowercase(), def);
    }

    /// Registers a log under the default column names case/activity/time.
    pub fn register_log(&mut self, name: &str, log: EventLog) {
        self.register(
            name,
            TableDef {
                log,
                case_column: "case".to_string(),
                activity_column: "activity".to_string(),
                time_column: "time".to_string(),
            },
        );
    }

    fn lookup(&self, name: &str) -> Option<&TableDef> {
        self.tables.get(&name.to_ascii_lowercase())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("unknown table {0:?}")]
    UnknownTable(String),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error(
        "DIRECTLYFOLLOWS requires three columns: the case, the activity, and the timestamp; {0}"
    )]
    Arity(String),
    #[error("type error: {0}")]
    Type(String),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Case,
    Activity,
    Time,
}

fn resolve_role(def: &TableDef, column: &str) -> Result<Role, ExecError> {
    let c = column.to_ascii_lowercase();
    if c == def.case_column.to_ascii_lowercase() {
        Ok(Role::Case)
    } else if c == def.activity_column.to_ascii_lowercase() {
        Ok(Role::Activity)
    } else if c == def.time_column.to_ascii_lowercase() {
        Ok(Role::Time)
    } else {
        Err(ExecError::UnknownColumn(column.to_string()))
    }
}

fn literal_as_time(lit: &Literal) -> Result<i64, ExecError> {
    match lit {
        Literal::Int(v) => Ok(*v),
        Literal::Str(s) => parse_timestamp(s, TimeFormat::Iso8601Utc)
            .map_err(|e| ExecError::Type(format!("time literal: {e}"))),
    }
}

fn eval_predicate(def: &TableDef, pred: &Predicate, event: &Event) -> Result<bool, ExecError> {
    let role = resolve_role(def, &pred.column)?;
    let ordering = match role {
        Role::Time => event.timestamp.cmp(&literal_as_time(&pred.literal)?),
        Role::Case | Role::Activity => {
            let value = match role {
                Role::Case => &event.case_id,
                _ => &event.activity,
            };
            let rhs = match &pred.literal {
                Literal::Str(s) => s.clone(),
                Literal::Int(v) => v.to_string(),
            };
            value.as_str().cmp(rhs.as_str())
        }
    };
    Ok(match pred.op {
        Comparator::Eq => ordering.is_eq(),
        Comparator::Lt => ordering.is_lt(),
        Comparator::Le => ordering.is_le(),
        Comparator::Gt => ordering.is_gt(),
        Comparator::Ge => ordering.is_ge(),
    })
}

fn filtered_log(def: &TableDef, predicates: &[Predicate]) -> Result<EventLog, ExecError> {
    let mut out = EventLog::new();
    for trace in def.log.traces() {
        for event in &trace.events {
            let mut keep = true;
            for pred in predicates {
                keep &= eval_predicate(def, pred, event)?;
            }
            if keep {
                out.push_event(event.clone());
            }
        }
    }
    Ok(out)
}

/// Checks a DfWrap inner projection: star is legal because every registered
/// table declares exactly the three role columns; an explicit projection
/// must name all three roles.
fn check_roles(def: &TableDef, projection: &Projection) -> Result<(), ExecError> {
    match projection {
        Projection::Star => Ok(()),
        Projection::Columns(cols) => {
            if cols.len() != 3 {
                return Err(ExecError::Arity(format!("got {} columns", cols.len())));
            }
            let mut roles = Vec::new();
            for c in cols {
                roles.push(resolve_role(def, c)?);
            }
            for want in [Role::Case, Role::Activity, Role::Time] {
                if !roles.contains(&want) {
                    return Err(ExecError::Arity("projection misses a role column".into()));
                }
            }
            Ok(())
        }
    }
}

pub fn execute(ast: &QueryAst, catalog: &Catalog) -> Result<ResultTable, ExecError> {
    match ast {
        QueryAst::Base(s) => {
            let def = catalog
                .lookup(&s.table)
                .ok_or_else(|| ExecError::UnknownTable(s.table.clone()))?;
            check_roles(def, &s.projection)?;
            let columns: Vec<(String, Role)> = match &s.projection {
                Projection::Star => vec![
                    (def.case_column.clone(), Role::Case),
                    (def.activity_column.clone(), Role::Activity),
                    (def.time_column.clone(), Role::Time),
                ],
                Projection::Columns(cols) => {
                    let mut out = Vec::new();
                    for c in cols {
                        out.push((c.clone(), resolve_role(def, c)?));
                    }
                    out
                }
            };
            let log = filtered_log(def, &s.predicates)?;
            let mut rows = Vec::new();
            for trace in log.traces() {
                for event in &trace.events {
                    rows.push(
                        columns
                            .iter()
                            .map(|(_, role)| match role {
                                Role::Case => event.case_id.clone(),
                                Role::Activity => event.activity.clone(),
                                Role::Time => event.timestamp.to_string(),
                            })
                            .collect(),
                    );
                }
            }
            Ok(ResultTable {
                columns: columns.into_iter().map(|(n, _)| n).collect(),
                rows,
            })
        }
        QueryAst::DfWrap(s) => {
            let def = catalog
                .lookup(&s.table)
                .ok_or_else(|| ExecError::UnknownTable(s.table.clone()))?;
            check_roles(def, &s.projection)?;
            let log = filtered_log(def, &s.predicates)?;
            let dfr = directly_follows(&log);
            let rows = dfr_to_rows(&dfr)
                .into_iter()
                .map(|(p, c, n)| vec![p, c, n.to_string()])
                .collect();
            Ok(ResultTable {
                columns: vec![
                    "Event_Label_P".to_string(),
                    "Event_Label_S".to_string(),
                    "Frequency".to_string(),
                ],
                rows,
            })
        }
    }
}
