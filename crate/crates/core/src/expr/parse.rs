use super::{Expression, LabelId, Op};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: join labels must differ (label {label} used twice)")]
    EqualJoinLabels {
        line: usize,
        column: usize,
        label: u32,
    },
    #[error("{line}:{column}: expected a positive integer, found `{found}`")]
    NonPositiveInteger {
        line: usize,
        column: usize,
        found: String,
    },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match *self {
            ParseError::Syntax { line, column, .. }
            | ParseError::EqualJoinLabels { line, column, .. }
            | ParseError::NonPositiveInteger { line, column, .. } => (line, column),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    Word(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
    }

    /// Next token with its 1-based line and column.
    fn next(&mut self) -> Option<(Tok<'a>, usize, usize)> {
        loop {
            let c = self.src[self.pos..].chars().next()?;
            if c.is_ascii_whitespace() {
                self.bump(c);
            } else if c == ';' {
                while let Some(c) = self.src[self.pos..].chars().next() {
                    self.bump(c);
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
        let (line, col) = (self.line, self.col);
        let c = self.src[self.pos..].chars().next()?;
        match c {
            '(' => {
                self.bump(c);
                Some((Tok::Open, line, col))
            }
            ')' => {
                self.bump(c);
                Some((Tok::Close, line, col))
            }
            _ => {
                let start = self.pos;
                while let Some(c) = self.src[self.pos..].chars().next() {
                    if c.is_ascii_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    self.bump(c);
                }
                Some((Tok::Word(&self.src[start..self.pos]), line, col))
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Form {
    Verts,
    Vert,
    Join,
    Ren,
    Fuse,
    Union,
}

impl Form {
    fn from_keyword(word: &str) -> Option<Form> {
        Some(match word {
            "verts" => Form::Verts,
            "vert" => Form::Vert,
            "join" => Form::Join,
            "ren" => Form::Ren,
            "fuse" => Form::Fuse,
            "union" => Form::Union,
            _ => return None,
        })
    }

    /// (integer arguments, subexpression arguments)
    fn shape(self) -> (usize, usize) {
        match self {
            Form::Verts => (2, 0),
            Form::Vert => (1, 0),
            Form::Join | Form::Ren => (2, 1),
            Form::Fuse => (1, 1),
            Form::Union => (0, 2),
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            Form::Verts => "verts",
            Form::Vert => "vert",
            Form::Join => "join",
            Form::Ren => "ren",
            Form::Fuse => "fuse",
            Form::Union => "union",
        }
    }
}

struct Frame {
    form: Form,
    line: usize,
    col: usize,
    ints: [u64; 2],
    n_ints: usize,
    n_children: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_int(word: &str, line: usize, column: usize) -> Result<u64, ParseError> {
    let digits = word.strip_prefix('-').unwrap_or(word);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax(line, column, format!("expected an integer, found `{word}`")));
    }
    if word.starts_with('-') || digits.bytes().all(|b| b == b'0') {
        return Err(ParseError::NonPositiveInteger {
            line,
            column,
            found: word.to_string(),
        });
    }
    digits
        .parse::<u64>()
        .map_err(|_| syntax(line, column, format!("integer `{word}` is out of range")))
}

fn label(value: u64, line: usize, column: usize) -> Result<LabelId, ParseError> {
    u32::try_from(value)
        .ok()
        .and_then(LabelId::new)
        .ok_or_else(|| syntax(line, column, format!("label {value} is out of range")))
}

/// Parses the s-expression text form into an [`Expression`].
///
/// The parser keeps an explicit stack, so nesting depth is bounded only by
/// memory.
pub fn parse_expression(text: &str) -> Result<Expression, ParseError> {
    let mut lex = Lexer::new(text);
    let mut ops: Vec<Op> = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    // (line, col) of each integer argument of the innermost frames, for errors
    let mut int_pos: Vec<[(usize, usize); 2]> = Vec::new();
    let mut done = false;

    while let Some((tok, line, col)) = lex.next() {
        if done {
            return Err(syntax(line, col, "unexpected input after the expression"));
        }
        match tok {
            Tok::Open => {
                if let Some(parent) = stack.last() {
                    let (_, n_sub) = parent.form.shape();
                    if parent.n_children >= n_sub {
                        return Err(syntax(
                            line,
                            col,
                            format!("too many operands for `{}`", parent.form.keyword()),
                        ));
                    }
                    let (n_int, _) = parent.form.shape();
                    if parent.n_ints < n_int {
                        return Err(syntax(
                            line,
                            col,
                            format!("`{}` expects {} integer(s) before its operand", parent.form.keyword(), n_int),
                        ));
                    }
                }
                let (kw, kline, kcol) = match lex.next() {
                    Some((Tok::Word(w), l, c)) => (w, l, c),
                    Some((_, l, c)) => return Err(syntax(l, c, "expected an operation keyword")),
                    None => return Err(syntax(line, col, "unterminated expression")),
                };
                let form = Form::from_keyword(kw)
                    .ok_or_else(|| syntax(kline, kcol, format!("unknown operation `{kw}`")))?;
                stack.push(Frame {
                    form,
                    line,
                    col,
                    ints: [0; 2],
                    n_ints: 0,
                    n_children: 0,
                });
                int_pos.push([(0, 0); 2]);
            }
            Tok::Word(w) => {
                let Some(frame) = stack.last_mut() else {
                    return Err(syntax(line, col, format!("expected `(`, found `{w}`")));
                };
                let (n_int, _) = frame.form.shape();
                if frame.n_ints >= n_int || frame.n_children > 0 {
                    return Err(syntax(
                        line,
                        col,
                        format!("unexpected `{w}` in `{}`", frame.form.keyword()),
                    ));
                }
                frame.ints[frame.n_ints] = parse_int(w, line, col)?;
                int_pos.last_mut().unwrap()[frame.n_ints] = (line, col);
                frame.n_ints += 1;
            }
            Tok::Close => {
                let Some(frame) = stack.pop() else {
                    return Err(syntax(line, col, "unbalanced `)`"));
                };
                let pos = int_pos.pop().unwrap();
                let (n_int, n_sub) = frame.form.shape();
                if frame.n_ints != n_int || frame.n_children != n_sub {
                    return Err(syntax(
                        frame.line,
                        frame.col,
                        format!(
                            "`{}` takes {} integer(s) and {} operand(s)",
                            frame.form.keyword(),
                            n_int,
                            n_sub
                        ),
                    ));
                }
                let lab = |k: usize| label(frame.ints[k], pos[k].0, pos[k].1);
                let op = match frame.form {
                    Form::Verts => Op::Verts {
                        label: lab(0)?,
                        count: frame.ints[1],
                    },
                    Form::Vert => Op::Verts {
                        label: lab(0)?,
                        count: 1,
                    },
                    Form::Join => {
                        let (i, j) = (lab(0)?, lab(1)?);
                        if i == j {
                            return Err(ParseError::EqualJoinLabels {
                                line: frame.line,
                                column: frame.col,
                                label: i.get(),
                            });
                        }
                        Op::Join { i, j }
                    }
                    Form::Ren => Op::Relabel {
                        from: lab(0)?,
                        to: lab(1)?,
                    },
                    Form::Fuse => Op::Fuse { label: lab(0)? },
                    Form::Union => Op::Union,
                };
                ops.push(op);
                match stack.last_mut() {
                    Some(parent) => parent.n_children += 1,
                    None => done = true,
                }
            }
        }
    }
    if let Some(frame) = stack.last() {
        return Err(syntax(frame.line, frame.col, "unterminated expression"));
    }
    if !done {
        return Err(syntax(lex.line, lex.col, "empty input"));
    }
    Ok(Expression { ops })
}
