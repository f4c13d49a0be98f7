use super::{is_valid_name, CellKind, NetlistError, RawGate, RawNetlist, SingleRailNetlist};

/// Parse and validate a netlist in the line-oriented text format.
pub fn parse_netlist(text: &str) -> Result<SingleRailNetlist, NetlistError> {
    let mut raw = RawNetlist::default();
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let body = full.split('#').next().unwrap_or("");
        let mut tokens = body.split_whitespace();
        let Some(word) = tokens.next() else { continue };
        let names = |toks: &mut dyn Iterator<Item = &str>| -> Result<Vec<String>, NetlistError> {
            toks.map(|t| {
                if is_valid_name(t) {
                    Ok(t.to_string())
                } else {
                    Err(NetlistError::InvalidName {
                        line,
                        name: t.to_string(),
                    })
                }
            })
            .collect()
        };
        match word {
            "input" => raw
                .inputs
                .extend(names(&mut tokens)?.into_iter().map(|n| (n, line))),
            "output" => raw
                .outputs
                .extend(names(&mut tokens)?.into_iter().map(|n| (n, line))),
            "gate" => {
                let kind_tok = tokens.next().ok_or_else(|| NetlistError::Syntax {
                    line,
                    message: "`gate` needs a kind and an output".into(),
                })?;
                let kind =
                    CellKind::from_name(kind_tok).ok_or_else(|| NetlistError::UnknownGateKind {
                        line,
                        kind: kind_tok.to_string(),
                    })?;
                let mut sigs = names(&mut tokens)?;
                if sigs.is_empty() {
                    return Err(NetlistError::Syntax {
                        line,
                        message: format!("`gate {kind}` needs an output signal"),
                    });
                }
                let output = sigs.remove(0);
                if sigs.len() != kind.arity() {
                    return Err(NetlistError::Arity {
                        line,
                        kind,
                        expected: kind.arity(),
                        found: sigs.len(),
                    });
                }
                raw.gates.push(RawGate {
                    kind,
                    output,
                    inputs: sigs,
                    line,
                });
            }
            other => {
                return Err(NetlistError::UnknownStatement {
                    line,
                    word: other.to_string(),
                });
            }
        }
    }
    SingleRailNetlist::from_raw(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_xor() {
        let n = parse_netlist("input a b\noutput y\ngate xor y a b").unwrap();
        assert_eq!(n.cells().len(), 1);
        assert_eq!(n.signal_count(), 3);
    }

    #[test]
    fn inverter() {
        let n = parse_netlist("input a\noutput y\ngate not y a").unwrap();
        assert_eq!(n.cells()[0].kind, CellKind::Not);
        assert_eq!(n.simulate(&[true]), vec![false]);
    }

    #[test]
    fn order_independent_sections() {
        let n = parse_netlist("gate and y a a\ninput a\noutput y").unwrap();
        assert_eq!(n.simulate(&[true]), vec![true]);
        assert_eq!(n.simulate(&[false]), vec![false]);
    }

    #[test]
    fn comments_and_interleaving() {
        let text =
            "# header\ninput a   # first\ngate or t a b\noutput y\ninput b\n\ngate buf y t\n";
        let n = parse_netlist(text).unwrap();
        assert_eq!(n.inputs().len(), 2);
        assert_eq!(n.simulate(&[false, true]), vec![true]);
    }

    #[test]
    fn gates_are_topologically_sorted() {
        let n = parse_netlist("input a\noutput y\ngate not y t\ngate buf t a").unwrap();
        assert_eq!(n.cells()[0].kind, CellKind::Buf);
        assert_eq!(
            n.to_text(),
            "input a\noutput y\ngate buf t a\ngate not y t\n"
        );
    }

    #[test]
    fn duplicate_driver() {
        let e = parse_netlist("input a b\noutput y\ngate and y a b\ngate or y a b").unwrap_err();
        assert_eq!(
            e,
            NetlistError::DuplicateDriver {
                line: 4,
                name: "y".into(),
                first: 3
            }
        );
        let e = parse_netlist("input a a\noutput a").unwrap_err();
        assert!(matches!(e, NetlistError::DuplicateDriver { line: 1, .. }));
        let e = parse_netlist("input a\noutput a\ngate not a a").unwrap_err();
        assert!(matches!(e, NetlistError::DuplicateDriver { line: 3, .. }));
    }

    #[test]
    fn undeclared_signal() {
        let e = parse_netlist("input a\noutput y\ngate and y a b").unwrap_err();
        assert_eq!(
            e,
            NetlistError::UndeclaredSignal {
                line: 3,
                name: "b".into()
            }
        );
        let e = parse_netlist("input a\noutput q").unwrap_err();
        assert_eq!(
            e,
            NetlistError::UndeclaredSignal {
                line: 2,
                name: "q".into()
            }
        );
    }

    #[test]
    fn cycle() {
        let e = parse_netlist("input a\noutput y\ngate and y a t\ngate or t y a").unwrap_err();
        assert!(matches!(e, NetlistError::Cycle { line: 3, .. }), "{e}");
        let e = parse_netlist("input a\noutput y\ngate xor y y a").unwrap_err();
        assert!(matches!(e, NetlistError::Cycle { line: 3, .. }));
    }

    #[test]
    fn unknown_kind_and_arity() {
        let e = parse_netlist("input a b\noutput y\ngate mux y a b").unwrap_err();
        assert_eq!(
            e,
            NetlistError::UnknownGateKind {
                line: 3,
                kind: "mux".into()
            }
        );
        let e = parse_netlist("input a b\noutput y\ngate not y a b").unwrap_err();
        assert!(matches!(
            e,
            NetlistError::Arity {
                line: 3,
                expected: 1,
                found: 2,
                ..
            }
        ));
        let e = parse_netlist("input a b\noutput y\ngate and y a").unwrap_err();
        assert!(matches!(
            e,
            NetlistError::Arity {
                expected: 2,
                found: 1,
                ..
            }
        ));
        let e = parse_netlist("input a\n\ngate\n").unwrap_err();
        assert!(matches!(e, NetlistError::Syntax { line: 3, .. }));
    }

    #[test]
    fn bad_names_and_statements() {
        let e = parse_netlist("input 1a").unwrap_err();
        assert!(matches!(e, NetlistError::InvalidName { line: 1, .. }));
        let e = parse_netlist("wire x").unwrap_err();
        assert!(matches!(e, NetlistError::UnknownStatement { line: 1, .. }));
        let e = parse_netlist("input const1").unwrap_err();
        assert!(matches!(e, NetlistError::ReservedName { .. }));
        assert_eq!(e.line(), 1);
    }
}
