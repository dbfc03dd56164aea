use std::ops::Range;

use crate::error::{GrammarError, GrammarViolation};

use super::vocab::{TokenKind, VocabLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Before `<start>`.
    Start,
    /// Expecting coordinate `k` of a vertex; `k = 0` only directly after `<start>` or `<sep>`.
    Coord(u8),
    /// A vertex is complete: next vertex, pointer, `<sep>` or `<end>`.
    Open,
    /// Expecting RQ token `j` of the `2 D` tokens following a pointer.
    Rq(u32),
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GrammarState {
    pub phase: Phase,
    /// Tokens consumed so far.
    pub position: usize,
    /// Vertices started in the current component.
    pub component_vertices: u32,
    /// Last pointer emitted for the current vertex.
    pub last_pointer: Option<u32>,
}

impl Default for GrammarState {
    fn default() -> Self {
        GrammarState { phase: Phase::Start, position: 0, component_vertices: 0, last_pointer: None }
    }
}

/// Allowed token ids as a union of half-open ranges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenMask(pub Vec<Range<u32>>);

impl TokenMask {
    pub fn contains(&self, t: u32) -> bool {
        self.0.iter().any(|r| r.contains(&t))
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|r| r.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().flat_map(|r| r.clone())
    }
}

pub fn validity_mask(state: &GrammarState, layout: &VocabLayout) -> TokenMask {
    let one = |t: u32| t..t + 1;
    TokenMask(match state.phase {
        Phase::Start => vec![one(layout.start())],
        Phase::Coord(_) => vec![layout.coord_range()],
        Phase::Open => {
            let mut r = Vec::with_capacity(4);
            if state.component_vertices < layout.pointer_max {
                r.push(layout.coord_range());
            }
            let base = layout.pointer_base();
            r.push(base + state.last_pointer.unwrap_or(0)..base + state.component_vertices);
            r.push(layout.sep()..layout.end() + 1);
            r
        }
        Phase::Rq(j) => vec![layout.level_range(j % layout.levels)],
        Phase::Done => vec![],
    })
}

fn describe(state: &GrammarState, layout: &VocabLayout) -> String {
    match state.phase {
        Phase::Start => "<start>".into(),
        Phase::Coord(k) => format!("coordinate {k}"),
        Phase::Open => format!("coordinate, pointer in {}..={}, <sep> or <end>", state.last_pointer.unwrap_or(0), state.component_vertices.saturating_sub(1)),
        Phase::Rq(j) => format!("code of quantizer level {}", j % layout.levels),
        Phase::Done => "nothing after <end>".into(),
    }
}

pub fn step(state: &GrammarState, token: u32, layout: &VocabLayout) -> Result<GrammarState, GrammarError> {
    let kind = layout.classify(token);
    let fail = |reason| GrammarError { position: state.position, found: token, found_kind: kind, expected: describe(state, layout), reason };
    let kind = kind.ok_or_else(|| fail(GrammarViolation::UnknownToken))?;
    let mut next = GrammarState { position: state.position + 1, ..*state };
    use GrammarViolation::*;
    match (state.phase, kind) {
        (Phase::Done, _) | (_, TokenKind::Start) if state.phase != Phase::Start => return Err(fail(Framing)),
        (Phase::Start, TokenKind::Start) => next.phase = Phase::Coord(0),
        (Phase::Start, _) => return Err(fail(Framing)),
        (Phase::Coord(k), TokenKind::Coord(_)) => {
            if k == 0 {
                next.component_vertices += 1;
            }
            next.phase = if k == 2 { Phase::Open } else { Phase::Coord(k + 1) };
        }
        (Phase::Coord(k), TokenKind::Sep | TokenKind::End) if k > 0 => return Err(fail(DelimiterPosition)),
        (Phase::Coord(_), _) => return Err(fail(UnexpectedKind)),
        (Phase::Open, TokenKind::Coord(_)) => {
            if state.component_vertices >= layout.pointer_max {
                return Err(fail(ComponentFull));
            }
            next.component_vertices += 1;
            next.last_pointer = None;
            next.phase = Phase::Coord(1);
        }
        (Phase::Open, TokenKind::Pointer(p)) => {
            if p >= state.component_vertices {
                return Err(fail(ForwardReference));
            }
            if p < state.last_pointer.unwrap_or(0) {
                return Err(fail(UnsortedPointer));
            }
            next.last_pointer = Some(p);
            next.phase = Phase::Rq(0);
        }
        (Phase::Open, TokenKind::Sep) => {
            next.component_vertices = 0;
            next.last_pointer = None;
            next.phase = Phase::Coord(0);
        }
        (Phase::Open, TokenKind::End) => next.phase = Phase::Done,
        (Phase::Open, _) => return Err(fail(UnexpectedKind)),
        (Phase::Rq(j), TokenKind::Rq { level, .. }) if level == j % layout.levels => {
            next.phase = if j + 1 == 2 * layout.levels { Phase::Open } else { Phase::Rq(j + 1) };
        }
        (Phase::Rq(_), TokenKind::Sep | TokenKind::End) => return Err(fail(DelimiterPosition)),
        (Phase::Rq(_), _) => return Err(fail(UnexpectedKind)),
        (Phase::Done, _) => return Err(fail(Framing)),
    }
    Ok(next)
}

/// Checks that a stream may stop in `state`.
pub fn finish(state: &GrammarState) -> Result<(), GrammarError> {
    if state.phase == Phase::Done {
        return Ok(());
    }
    let reason = if state.phase == Phase::Start { GrammarViolation::Framing } else { GrammarViolation::IncompleteVertex };
    Err(GrammarError { position: state.position, found: u32::MAX, found_kind: None, expected: "<end>".into(), reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layout() -> VocabLayout {
        VocabLayout::new(256, 4, 256)
    }

    fn run(tokens: &[u32]) -> Result<GrammarState, GrammarError> {
        let l = layout();
        tokens.iter().try_fold(GrammarState::default(), |s, &t| step(&s, t, &l))
    }

    #[test]
    fn after_start_only_coordinates() {
        let l = layout();
        let s = run(&[l.start()]).unwrap();
        assert_eq!(validity_mask(&s, &l), TokenMask(vec![0..128]));
    }

    #[test]
    fn mid_group_allows_only_the_current_level() {
        let l = layout();
        let mut toks = vec![l.start(), 1, 2, 3, 4, 5, 6, l.pointer_base()];
        toks.extend([l.level_range(0).start, l.level_range(1).start, l.level_range(2).start]);
        let s = run(&toks).unwrap();
        assert_eq!(s.phase, Phase::Rq(3));
        let m = validity_mask(&s, &l);
        assert_eq!(m, TokenMask(vec![l.level_range(3)]));
        assert!(!m.contains(l.sep()) && !m.contains(l.end()));
        let e = step(&s, l.end(), &l).unwrap_err();
        assert_eq!(e.reason, GrammarViolation::DelimiterPosition);
    }

    #[test]
    fn single_vertex_component_open_state() {
        let l = layout();
        let s = run(&[l.start(), 10, 20, 30]).unwrap();
        let m = validity_mask(&s, &l);
        let expected: Vec<u32> = (0..128).chain([l.pointer_base()]).chain([l.sep(), l.end()]).collect();
        assert_eq!(m.iter().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn violations_carry_reason_and_position() {
        let l = layout();
        let e = run(&[l.start(), 1, 2, 3, l.pointer_base() + 1]).unwrap_err();
        assert_eq!((e.reason, e.position), (GrammarViolation::ForwardReference, 4));
        let e = run(&[l.start(), 1, 2, l.sep()]).unwrap_err();
        assert_eq!(e.reason, GrammarViolation::DelimiterPosition);
        let e = run(&[1]).unwrap_err();
        assert_eq!(e.reason, GrammarViolation::Framing);
        let e = run(&[l.start(), l.size()]).unwrap_err();
        assert_eq!(e.reason, GrammarViolation::UnknownToken);
        let s = run(&[l.start(), 1, 2, 3, l.end()]).unwrap();
        assert!(finish(&s).is_ok());
        assert_eq!(step(&s, 4, &l).unwrap_err().reason, GrammarViolation::Framing);
        let s = run(&[l.start(), 1, 2]).unwrap();
        assert_eq!(finish(&s).unwrap_err().reason, GrammarViolation::IncompleteVertex);
    }

    #[test]
    fn pointers_are_non_decreasing_and_self_allowed() {
        let l = layout();
        let group = |p: u32| {
            let mut v = vec![l.pointer_base() + p];
            for j in 0..8 {
                v.push(l.level_range(j % 4).start);
            }
            v
        };
        let mut toks = vec![l.start(), 1, 1, 1, 2, 2, 2];
        toks.extend(group(1));
        toks.extend(group(1));
        toks.extend(group(0).into_iter().take(1));
        let e = run(&toks).unwrap_err();
        assert_eq!(e.reason, GrammarViolation::UnsortedPointer);
    }

    #[test]
    fn full_component_refuses_another_vertex() {
        let l = VocabLayout::new(2, 1, 4);
        let s = [l.start(), 1, 1, 1, 2, 2, 2].iter().try_fold(GrammarState::default(), |s, &t| step(&s, t, &l)).unwrap();
        assert!(!validity_mask(&s, &l).contains(5));
        assert_eq!(step(&s, 5, &l).unwrap_err().reason, GrammarViolation::ComponentFull);
        let s = step(&s, l.sep(), &l).unwrap();
        assert!(step(&s, 5, &l).is_ok());
    }

    proptest! {
        #[test]
        fn mask_is_exactly_the_domain_of_step(choices in proptest::collection::vec(0usize..10_000, 1..120)) {
            let l = VocabLayout::new(4, 2, 3);
            let mut s = GrammarState::default();
            for c in choices {
                let mask = validity_mask(&s, &l);
                for t in 0..l.size() + 2 {
                    prop_assert_eq!(mask.contains(t), step(&s, t, &l).is_ok(), "token {} in {:?}", t, s);
                }
                if mask.is_empty() {
                    break;
                }
                let allowed: Vec<u32> = mask.iter().collect();
                s = step(&s, allowed[c % allowed.len()], &l).unwrap();
            }
        }
    }
}
