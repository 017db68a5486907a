use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Zero,
    Def,
    Main,
    Const,
    New,
    If,
    Then,
    Else,
    LParen,
    RParen,
    Lt,
    Gt,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Plus,
    Bar,
    At,
    Eq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Zero => "0",
            Tok::Def => "def",
            Tok::Main => "main",
            Tok::Const => "const",
            Tok::New => "new",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Plus => "+",
            Tok::Bar => "|",
            Tok::At => "@",
            Tok::Eq => "=",
            Tok::Ident(_) | Tok::Eof => "",
        }
    }
}

pub const KEYWORDS: &[&str] = &["def", "main", "const", "new", "if", "then", "else"];

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub(crate) fn lex(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let ch = chars.next();
            if ch == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            ch
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while let Some(&d) = chars.peek() {
                if d == '\n' {
                    break;
                }
                bump(&mut chars);
            }
            continue;
        }
        let tok = if is_ident_start(c) {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !is_ident_char(d) {
                    break;
                }
                s.push(d);
                bump(&mut chars);
            }
            match s.as_str() {
                "def" => Tok::Def,
                "main" => Tok::Main,
                "const" => Tok::Const,
                "new" => Tok::New,
                "if" => Tok::If,
                "then" => Tok::Then,
                "else" => Tok::Else,
                _ => Tok::Ident(s),
            }
        } else {
            bump(&mut chars);
            match c {
                '0' => {
                    if chars.peek().is_some_and(|d| d.is_ascii_alphanumeric()) {
                        return Err(SyntaxError::at(l0, c0, "only the literal 0 is allowed"));
                    }
                    Tok::Zero
                }
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '+' => Tok::Plus,
                '|' => Tok::Bar,
                '@' => Tok::At,
                '=' => Tok::Eq,
                other => {
                    return Err(SyntaxError::at(l0, c0, format!("unexpected character {other:?}")));
                }
            }
        };
        out.push(Spanned {
            tok,
            line: l0,
            col: c0,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
