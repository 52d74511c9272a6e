//! Newick trees.

use crate::error::{Error, Result};
use crate::tree::PhyloTree;

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

const SPECIAL: &[char] = &['(', ')', ',', ':', ';', '[', ']', '\''];

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<Option<char>> {
        self.skip_blank()?;
        Ok(self.text[self.pos..].chars().next())
    }

    fn skip_blank(&mut self) -> Result<()> {
        loop {
            let rest = &self.text[self.pos..];
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with('[') {
                let end = trimmed
                    .find(']')
                    .ok_or_else(|| Error::parse(self.pos, "unterminated comment"))?;
                self.pos += end + 1;
            } else {
                return Ok(());
            }
        }
    }

    fn label(&mut self) -> Result<Option<String>> {
        match self.peek()? {
            Some('\'') => {
                let start = self.pos;
                self.pos += 1;
                let mut out = String::new();
                loop {
                    let rest = &self.text[self.pos..];
                    let Some(end) = rest.find('\'') else {
                        return Err(Error::parse(start, "unterminated quoted label"));
                    };
                    out.push_str(&rest[..end]);
                    self.pos += end + 1;
                    if self.text[self.pos..].starts_with('\'') {
                        out.push('\'');
                        self.pos += 1;
                    } else {
                        return Ok(Some(out));
                    }
                }
            }
            Some(c) if !SPECIAL.contains(&c) => {
                let rest = &self.text[self.pos..];
                let end = rest
                    .find(|c: char| SPECIAL.contains(&c) || c.is_whitespace())
                    .unwrap_or(rest.len());
                self.pos += end;
                Ok(Some(rest[..end].replace('_', " ")))
            }
            _ => Ok(None),
        }
    }

    fn length(&mut self) -> Result<f64> {
        if self.peek()? != Some(':') {
            return Ok(0.0);
        }
        self.pos += 1;
        self.skip_blank()?;
        let start = self.pos;
        let rest = &self.text[self.pos..];
        let end = rest
            .find(|c: char| SPECIAL.contains(&c) || c.is_whitespace())
            .unwrap_or(rest.len());
        let token = &rest[..end];
        let value: f64 = token
            .parse()
            .map_err(|_| Error::parse(start, format!("invalid branch length {token:?}")))?;
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::parse(start, format!("branch length {token} is not a finite non-negative number")));
        }
        self.pos += end;
        Ok(value)
    }

    /// Parse one subtree below `parent` (or as the root when `None`).
    fn subtree(&mut self, tree: &mut Option<PhyloTree>, parent: Option<usize>) -> Result<()> {
        let start = self.pos;
        let id = match (tree.as_mut(), parent) {
            (None, _) => {
                *tree = Some(PhyloTree::with_root(None));
                0
            }
            (Some(t), Some(p)) => t.add_child(p, None, 0.0),
            (Some(_), None) => unreachable!("only the root has no parent"),
        };
        if self.peek()? == Some('(') {
            self.pos += 1;
            loop {
                self.subtree(tree, Some(id))?;
                match self.peek()? {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(c) => return Err(Error::parse(self.pos, format!("expected ',' or ')', found {c:?}"))),
                    None => return Err(Error::parse(self.pos, "unbalanced parentheses")),
                }
            }
        }
        let label = self.label()?;
        let length = self.length()?;
        let t = tree.as_mut().expect("created above");
        if t.node(id).children.is_empty() && label.is_none() {
            return Err(Error::parse(start, "leaf without a label"));
        }
        t.set_node(id, label, length);
        Ok(())
    }
}

/// Parse a Newick string. Missing branch lengths default to 0; underscores
/// in unquoted labels become spaces.
pub fn parse_newick(text: &str) -> Result<PhyloTree> {
    let mut parser = Parser { text, pos: 0 };
    if parser.peek()?.is_none() {
        return Err(Error::parse(0, "empty tree"));
    }
    let mut tree = None;
    parser.subtree(&mut tree, None)?;
    if parser.peek()? == Some(';') {
        parser.pos += 1;
    } else if let Some(c) = parser.peek()? {
        return Err(Error::parse(parser.pos, format!("expected ';', found {c:?}")));
    }
    if let Some(c) = parser.peek()? {
        return Err(Error::parse(parser.pos, format!("unexpected {c:?} after the tree")));
    }
    let mut tree = tree.expect("parsed");
    tree.set_node(tree.root(), tree.node(tree.root()).label.clone(), 0.0);
    tree.validate().map_err(|e| Error::parse(0, e.to_string()))?;
    Ok(tree)
}

fn quote(label: &str) -> String {
    if label.is_empty() || label.contains(|c: char| SPECIAL.contains(&c) || c.is_whitespace() || c == '_') {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Newick with 6-decimal lengths; children ordered by the smallest leaf
/// label below them.
pub fn emit_newick(tree: &PhyloTree) -> String {
    let mut min_label: Vec<String> = vec![String::new(); tree.len()];
    for v in tree.postorder() {
        let node = tree.node(v);
        min_label[v] = if node.children.is_empty() {
            node.label.clone().unwrap_or_default()
        } else {
            node.children.iter().map(|&c| min_label[c].clone()).min().unwrap_or_default()
        };
    }
    fn write(tree: &PhyloTree, v: usize, keys: &[String], out: &mut String) {
        let node = tree.node(v);
        if !node.children.is_empty() {
            let mut children = node.children.clone();
            children.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
            out.push('(');
            for (i, &c) in children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write(tree, c, keys, out);
            }
            out.push(')');
        }
        if let Some(label) = &node.label {
            out.push_str(&quote(label));
        }
        if node.parent.is_some() {
            out.push_str(&format!(":{:.6}", node.length));
        }
    }
    let mut out = String::new();
    write(tree, tree.root(), &min_label, &mut out);
    out.push(';');
    out
}
