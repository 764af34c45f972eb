//! Gambit extensive-form game (.efg) text files.
//!
//! [`serialize_efg`] writes a compiled game in the Gambit EFG version-2
//! dialect this toolkit exchanges: empty node/outcome names, per-player
//! information-set numbers dense from 1 in order of first appearance, one
//! chance information set per abnormal component, and outcome numbers dense
//! from 1 in depth-first order. [`parse_efg`] reads the same dialect back.
//! Serialization of a parsed game reproduces the input byte for byte.
//!
//! Parsing recovers structure, not provenance: the abnormal components are
//! the owners of chance nodes (each chance node must directly precede the
//! moves of one component, which holds for every compiled game), the realized
//! system utility at a leaf is the sum of the normal players' payoffs (their
//! shares partition it), and a compromised realization is the first branch of
//! each chance node.

use std::collections::{BTreeMap, BTreeSet};
use std::iter::Peekable;
use std::str::Chars;

use crate::game::{Branch, Game, InfoKey, NodeKind, PlayerType, TreeBuilder};
use crate::system::ComponentId;
use crate::tolerances;
use crate::{Error, Result};

/// Formats a number the way .efg files and CSV reports store it: integers
/// bare, everything else with up to 12 decimal places, trailing zeros
/// trimmed.
pub fn fmt_decimal(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    let mut s = format!("{x:.12}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

struct Numbering {
    chance: BTreeMap<ComponentId, usize>,
    /// Per player: compiled infoset index -> .efg infoset number.
    personal: Vec<BTreeMap<usize, usize>>,
    outcome: usize,
}

/// Serializes a game to .efg text.
pub fn serialize_efg(game: &Game) -> String {
    let mut out = String::new();
    out.push_str(&format!("EFG 2 R {} {{", quote(&game.title)));
    for name in &game.player_names {
        out.push(' ');
        out.push_str(&quote(name));
    }
    out.push_str(" }\n\n");
    let mut numbering = Numbering {
        chance: BTreeMap::new(),
        personal: vec![BTreeMap::new(); game.players.len()],
        outcome: 0,
    };
    write_node(game, 0, &mut numbering, &mut out);
    out
}

fn write_node(game: &Game, id: usize, numbering: &mut Numbering, out: &mut String) {
    let node = &game.nodes[id];
    match node.kind {
        NodeKind::Chance => {
            let next = numbering.chance.len() + 1;
            let iset = *numbering.chance.entry(node.player).or_insert(next);
            out.push_str(&format!("c \"\" {iset} \"\" {{"));
            for b in &node.branches {
                out.push_str(&format!(
                    " {} {}",
                    quote(&b.label),
                    fmt_decimal(b.prob.expect("chance branch"))
                ));
            }
            out.push_str(" } 0\n");
            for b in &node.branches {
                write_node(game, b.child, numbering, out);
            }
        }
        NodeKind::Decision => {
            let player = game.player_index(node.player).expect("mover is a player");
            let sets = &mut numbering.personal[player];
            let next = sets.len() + 1;
            let iset = *sets.entry(node.infoset).or_insert(next);
            out.push_str(&format!("p \"\" {} {iset} \"\" {{", player + 1));
            for b in &node.branches {
                out.push_str(&format!(" {}", quote(&b.label)));
            }
            out.push_str(" } 0\n");
            for b in &node.branches {
                write_node(game, b.child, numbering, out);
            }
        }
        NodeKind::Terminal => {
            numbering.outcome += 1;
            let payoffs: Vec<String> = node.payoffs.iter().map(|p| fmt_decimal(*p)).collect();
            out.push_str(&format!(
                "t \"\" {} \"\" {{ {} }}\n",
                numbering.outcome,
                payoffs.join(", ")
            ));
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, PartialEq)]
enum Tok {
    Str(String),
    Atom(String),
    Sym(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut it: Peekable<Chars> = text.chars().peekable();
    while let Some(&c) = it.peek() {
        match c {
            '\n' => {
                line += 1;
                it.next();
            }
            c if c.is_whitespace() => {
                it.next();
            }
            '{' | '}' | ',' => {
                out.push((Tok::Sym(c), line));
                it.next();
            }
            '"' => {
                it.next();
                let mut s = String::new();
                loop {
                    match it.next() {
                        None => {
                            return Err(Error::Validation(format!(
                                "line {line}: unterminated string"
                            )))
                        }
                        Some('\\') => match it.next() {
                            Some(escaped) => s.push(escaped),
                            None => {
                                return Err(Error::Validation(format!(
                                    "line {line}: unterminated string"
                                )))
                            }
                        },
                        Some('"') => break,
                        Some('\n') => {
                            line += 1;
                            s.push('\n');
                        }
                        Some(other) => s.push(other),
                    }
                }
                out.push((Tok::Str(s), line));
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = it.peek() {
                    if c.is_whitespace() || matches!(c, '{' | '}' | ',' | '"') {
                        break;
                    }
                    s.push(c);
                    it.next();
                }
                out.push((Tok::Atom(s), line));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or_else(|| self.toks.last()).map(|(_, l)| *l).unwrap_or(1)
    }

    fn next(&mut self, what: &str) -> Result<&Tok> {
        let line = self.line();
        match self.toks.get(self.pos) {
            Some((tok, _)) => {
                self.pos += 1;
                Ok(tok)
            }
            None => Err(Error::Validation(format!(
                "line {line}: unexpected end of file, expected {what}"
            ))),
        }
    }

    fn expect_str(&mut self, what: &str) -> Result<String> {
        let line = self.line();
        match self.next(what)? {
            Tok::Str(s) => Ok(s.clone()),
            other => Err(Error::Validation(format!(
                "line {line}: expected {what} (a quoted string), found {other:?}"
            ))),
        }
    }

    fn expect_atom(&mut self, what: &str) -> Result<String> {
        let line = self.line();
        match self.next(what)? {
            Tok::Atom(s) => Ok(s.clone()),
            other => Err(Error::Validation(format!(
                "line {line}: expected {what}, found {other:?}"
            ))),
        }
    }

    fn expect_usize(&mut self, what: &str) -> Result<usize> {
        let line = self.line();
        let atom = self.expect_atom(what)?;
        atom.parse().map_err(|_| {
            Error::Validation(format!("line {line}: expected {what} (an integer), found {atom:?}"))
        })
    }

    fn expect_f64(&mut self, what: &str) -> Result<f64> {
        let line = self.line();
        let atom = self.expect_atom(what)?;
        atom.parse().map_err(|_| {
            Error::Validation(format!("line {line}: expected {what} (a number), found {atom:?}"))
        })
    }

    fn expect_sym(&mut self, sym: char) -> Result<()> {
        let line = self.line();
        match self.next(&format!("{sym:?}"))? {
            Tok::Sym(c) if *c == sym => Ok(()),
            other => {
                Err(Error::Validation(format!("line {line}: expected {sym:?}, found {other:?}")))
            }
        }
    }

    fn at_sym(&self, sym: char) -> bool {
        matches!(self.toks.get(self.pos), Some((Tok::Sym(c), _)) if *c == sym)
    }
}

struct ChanceSet {
    /// Filled in at the set's first member node; only the children reveal
    /// whose move the chance draw precedes.
    owner: Option<ComponentId>,
    labels: Vec<String>,
    probs: Vec<f64>,
}

struct ParseState {
    builder: TreeBuilder,
    n_players: usize,
    /// .efg chance infoset number -> registration.
    chance_sets: BTreeMap<usize, ChanceSet>,
    /// Per player: count of infoset numbers seen so far (they must be dense).
    personal_seen: Vec<usize>,
    next_outcome: usize,
}

fn parse_node(p: &mut Parser, st: &mut ParseState) -> Result<usize> {
    let line = p.line();
    let tag = p.expect_atom("a node tag (c, p or t)")?;
    match tag.as_str() {
        "c" => {
            p.expect_str("the node name")?;
            let iset = p.expect_usize("the chance information-set number")?;
            p.expect_str("the information-set name")?;
            p.expect_sym('{')?;
            let mut raw = Vec::new();
            while !p.at_sym('}') {
                let label = p.expect_str("an action label")?;
                let prob = p.expect_f64("an action probability")?;
                raw.push((label, prob));
            }
            p.expect_sym('}')?;
            if p.expect_usize("the outcome number")? != 0 {
                return Err(Error::Validation(format!(
                    "line {line}: outcomes attached to internal nodes are not supported"
                )));
            }
            if raw.is_empty() {
                return Err(Error::Validation(format!("line {line}: chance node with no actions")));
            }
            let sum: f64 = raw.iter().map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > tolerances::PROB_SUM {
                return Err(Error::Validation(format!(
                    "line {line}: chance probabilities sum to {}",
                    fmt_decimal(sum)
                )));
            }
            // Register the set before descending: a subtree may hold further
            // chance sets, and the numbering is dense in the order the sets
            // first appear in the file, not in the order subtrees complete.
            let labels: Vec<String> = raw.iter().map(|(l, _)| l.clone()).collect();
            let probs: Vec<f64> = raw.iter().map(|(_, p)| *p).collect();
            match st.chance_sets.get(&iset) {
                None => {
                    if iset != st.chance_sets.len() + 1 {
                        return Err(Error::Validation(format!(
                            "line {line}: chance information-set numbers must be dense from 1 \
                             (found {iset}, expected {})",
                            st.chance_sets.len() + 1
                        )));
                    }
                    st.chance_sets.insert(iset, ChanceSet { owner: None, labels, probs });
                }
                Some(prev) => {
                    if prev.labels != labels || prev.probs != probs {
                        return Err(Error::Validation(format!(
                            "line {line}: chance information set {iset} is reused with \
                             different actions or probabilities"
                        )));
                    }
                }
            }
            let id = st.builder.reserve();
            let mut branches = Vec::with_capacity(raw.len());
            for (label, prob) in raw {
                let child = parse_node(p, st)?;
                branches.push(Branch {
                    observed: label.clone(),
                    label,
                    effect: 0,
                    prob: Some(prob),
                    child,
                });
            }
            let mut owner = None;
            for b in &branches {
                let child = st.builder.node(b.child);
                if child.kind == NodeKind::Decision {
                    match owner {
                        None => owner = Some(child.player),
                        Some(prev) if prev != child.player => {
                            return Err(Error::Validation(format!(
                                "line {line}: chance node is followed by moves of two different \
                                 players ({prev} and {})",
                                child.player
                            )));
                        }
                        _ => {}
                    }
                }
            }
            let owner = owner.ok_or_else(|| {
                Error::Validation(format!(
                    "line {line}: cannot infer which component this chance node resolves \
                     (no child is a decision node)"
                ))
            })?;
            let entry = st.chance_sets.get_mut(&iset).expect("registered above");
            match entry.owner {
                None => entry.owner = Some(owner),
                Some(prev) if prev != owner => {
                    return Err(Error::Validation(format!(
                        "line {line}: chance information set {iset} is reused with a \
                         different owner ({prev} and {owner})"
                    )));
                }
                _ => {}
            }
            st.builder.set_chance(id, owner, branches);
            Ok(id)
        }
        "p" => {
            p.expect_str("the node name")?;
            let player = p.expect_usize("the player number")?;
            if player == 0 || player > st.n_players {
                return Err(Error::Validation(format!(
                    "line {line}: player number {player} is outside 1..={}",
                    st.n_players
                )));
            }
            let iset = p.expect_usize("the information-set number")?;
            p.expect_str("the information-set name")?;
            p.expect_sym('{')?;
            let mut labels = Vec::new();
            while !p.at_sym('}') {
                labels.push(p.expect_str("an action label")?);
            }
            p.expect_sym('}')?;
            if p.expect_usize("the outcome number")? != 0 {
                return Err(Error::Validation(format!(
                    "line {line}: outcomes attached to internal nodes are not supported"
                )));
            }
            if labels.is_empty() {
                return Err(Error::Validation(format!(
                    "line {line}: decision node with no actions"
                )));
            }
            let seen = st.personal_seen[player - 1];
            if iset == 0 || iset > seen + 1 {
                return Err(Error::Validation(format!(
                    "line {line}: information-set numbers of player {player} must be dense \
                     from 1 (found {iset}, at most {} expected)",
                    seen + 1
                )));
            }
            if iset == seen + 1 {
                st.personal_seen[player - 1] = iset;
            }
            let id = st.builder.reserve();
            let mut branches = Vec::with_capacity(labels.len());
            for label in labels {
                let child = parse_node(p, st)?;
                branches.push(Branch {
                    observed: label.clone(),
                    label,
                    effect: 0,
                    prob: None,
                    child,
                });
            }
            // Set identity is (player, infoset number); the original
            // knowledge key is not stored in the file.
            let key = InfoKey {
                player: ComponentId(player as u32),
                ptype: PlayerType::Normal,
                observed: vec![iset.to_string()],
            };
            st.builder.set_decision(id, key, branches)?;
            Ok(id)
        }
        "t" => {
            p.expect_str("the node name")?;
            let outcome = p.expect_usize("the outcome number")?;
            if outcome != st.next_outcome {
                return Err(Error::Validation(format!(
                    "line {line}: outcome numbers must be dense from 1 in depth-first order \
                     (found {outcome}, expected {})",
                    st.next_outcome
                )));
            }
            st.next_outcome += 1;
            p.expect_str("the outcome name")?;
            p.expect_sym('{')?;
            let mut payoffs = Vec::new();
            loop {
                payoffs.push(p.expect_f64("a payoff")?);
                if p.at_sym(',') {
                    p.expect_sym(',')?;
                } else {
                    break;
                }
            }
            p.expect_sym('}')?;
            if payoffs.len() != st.n_players {
                return Err(Error::Validation(format!(
                    "line {line}: terminal lists {} payoffs for {} players",
                    payoffs.len(),
                    st.n_players
                )));
            }
            let id = st.builder.reserve();
            st.builder.set_terminal(id, payoffs, 0.0, BTreeSet::new());
            Ok(id)
        }
        other => {
            Err(Error::Validation(format!("line {line}: unknown node tag {other:?}")))
        }
    }
}

/// Parses .efg text into a game. Player ids are positional (player k of the
/// header becomes component id k); information-set keys carry the file's set
/// numbers instead of the original knowledge keys.
pub fn parse_efg(text: &str) -> Result<Game> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let line = p.line();
    let magic = p.expect_atom("the EFG header")?;
    if magic != "EFG" {
        return Err(Error::Validation(format!(
            "line {line}: missing EFG header (file starts with {magic:?})"
        )));
    }
    let version = p.expect_usize("the format version")?;
    if version != 2 {
        return Err(Error::Validation(format!(
            "line {line}: unsupported EFG version {version} (only 2 is supported)"
        )));
    }
    let kind = p.expect_atom("the payoff kind")?;
    if kind != "R" {
        return Err(Error::Validation(format!(
            "line {line}: unsupported payoff kind {kind:?} (only R is supported)"
        )));
    }
    let title = p.expect_str("the game title")?;
    p.expect_sym('{')?;
    let mut names = Vec::new();
    while !p.at_sym('}') {
        names.push(p.expect_str("a player name")?);
    }
    p.expect_sym('}')?;
    if names.is_empty() {
        return Err(Error::Validation(format!("line {line}: the game lists no players")));
    }
    let players: Vec<ComponentId> = (1..=names.len() as u32).map(ComponentId).collect();
    let mut st = ParseState {
        builder: TreeBuilder::new(players, names),
        n_players: 0,
        chance_sets: BTreeMap::new(),
        personal_seen: Vec::new(),
        next_outcome: 1,
    };
    st.n_players = st.builder.player_count();
    st.personal_seen = vec![0; st.n_players];
    let root = parse_node(&mut p, &mut st)?;
    debug_assert_eq!(root, 0);
    if p.pos != p.toks.len() {
        return Err(Error::Validation(format!(
            "line {}: trailing content after the game tree",
            p.line()
        )));
    }
    let owner_of = |c: &ChanceSet| c.owner.expect("owner inferred at the set's first member");
    let abnormal: BTreeSet<ComponentId> =
        st.chance_sets.values().map(owner_of).collect();
    let chance_probs: BTreeMap<ComponentId, f64> =
        st.chance_sets.values().map(|c| (owner_of(c), c.probs[0])).collect();
    let mut game = st.builder.finish(title, abnormal, chance_probs);
    restore_terminal_annotations(&mut game);
    Ok(game)
}

/// Fills terminal system utilities (sum of normal players' payoff shares) and
/// realized compromise sets (first chance branch taken means compromised).
fn restore_terminal_annotations(game: &mut Game) {
    let normal: Vec<usize> = game
        .players
        .iter()
        .enumerate()
        .filter(|(_, id)| !game.abnormal.contains(id))
        .map(|(k, _)| k)
        .collect();
    let mut stack: Vec<(usize, BTreeSet<ComponentId>)> = vec![(0, BTreeSet::new())];
    while let Some((id, realized)) = stack.pop() {
        match game.nodes[id].kind {
            NodeKind::Terminal => {
                let u0 = normal.iter().map(|&k| game.nodes[id].payoffs[k]).sum();
                game.nodes[id].system_utility = u0;
                game.nodes[id].realized_com = realized;
            }
            NodeKind::Chance => {
                let owner = game.nodes[id].player;
                for (k, b) in game.nodes[id].branches.clone().iter().enumerate() {
                    let mut next = realized.clone();
                    if k == 0 {
                        next.insert(owner);
                    }
                    stack.push((b.child, next));
                }
            }
            NodeKind::Decision => {
                for b in game.nodes[id].branches.clone() {
                    stack.push((b.child, realized.clone()));
                }
            }
        }
    }
}

/// Structural equality of two games within a numeric tolerance: same shape,
/// same movers (by player position), same labels, same information-set
/// partition, probabilities and payoffs equal within `tol`. Knowledge keys
/// and action provenance are ignored (parsing does not recover them).
pub fn structurally_equal(a: &Game, b: &Game, tol: f64) -> bool {
    if a.players.len() != b.players.len()
        || a.nodes.len() != b.nodes.len()
        || a.infosets.len() != b.infosets.len()
    {
        return false;
    }
    for (na, nb) in a.nodes.iter().zip(&b.nodes) {
        if na.kind != nb.kind || na.branches.len() != nb.branches.len() {
            return false;
        }
        match na.kind {
            NodeKind::Terminal => {
                if na
                    .payoffs
                    .iter()
                    .zip(&nb.payoffs)
                    .any(|(x, y)| (x - y).abs() > tol)
                {
                    return false;
                }
            }
            NodeKind::Decision => {
                if a.player_index(na.player) != b.player_index(nb.player)
                    || na.infoset != nb.infoset
                {
                    return false;
                }
            }
            NodeKind::Chance => {}
        }
        for (ba, bb) in na.branches.iter().zip(&nb.branches) {
            if ba.label != bb.label || ba.child != bb.child {
                return false;
            }
            match (ba.prob, bb.prob) {
                (None, None) => {}
                (Some(x), Some(y)) => {
                    if (x - y).abs() > tol {
                        return false;
                    }
                }
                _ => return false,
            }
        }
    }
    true
}
