//! Frontend integration tests over the fixture corpus.

use hrbc_core::frontend::{check, parse_model, pretty_print, tokenize};

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {}: {}", path, e))
}

const CORPUS: &[&str] = &[
    "heater.hrebeca",
    "bbw.hrebeca",
    "bbw_reaction.hrebeca",
    "bbw_release.hrebeca",
    "fault_queue.hrebeca",
    "fault_timer.hrebeca",
    "fault_canprio.hrebeca",
    "delay_micro.hrebeca",
    "disc_pingpong.hrebeca",
    "disc_counter.hrebeca",
    "disc_ring.hrebeca",
];

#[test]
fn corpus_parses_and_checks() {
    for name in CORPUS {
        let source = fixture(name);
        let ast = parse_model(&source).unwrap_or_else(|d| panic!("{}: {}", name, d));
        let model = check(&ast).unwrap_or_else(|ds| {
            panic!(
                "{}: {}",
                name,
                ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
            )
        });
        assert!(
            !model.instances.is_empty(),
            "{}: expected at least one instance",
            name
        );
    }
}

#[test]
fn corpus_round_trips() {
    for name in CORPUS {
        let source = fixture(name);
        let ast = parse_model(&source).unwrap();
        let printed = pretty_print(&ast);
        let reparsed = parse_model(&printed)
            .unwrap_or_else(|d| panic!("{} reparse: {}\n---\n{}", name, d, printed));
        assert_eq!(ast, reparsed, "{}: round-trip mismatch", name);
    }
}

#[test]
fn bbw_has_seven_instances() {
    let ast = parse_model(&fixture("bbw.hrebeca")).unwrap();
    let model = check(&ast).unwrap();
    assert_eq!(model.instances.len(), 7);
    let names: Vec<&str> = model.instances.iter().map(|i| i.name.as_str()).collect();
    assert_eq!(
        names,
        ["wR", "wL", "wctlrR", "wctlrL", "bctlr", "brake", "clock"]
    );
    assert_eq!(model.can.len(), 4);
}

#[test]
fn instance_decl_example() {
    use hrbc_core::frontend::ast::Connection;
    let src = "physicalclass Wheel { knownrebecs { WCtlr wctlrR; } statevars { real s; } \
               msgsrv initial(float i) { s = i; } } \
               softwareclass WCtlr { knownrebecs { } statevars { } msgsrv initial() { } } \
               main { Wheel wR (@Wire wctlrR):(1); WCtlr wctlrR ():(); }";
    let ast = parse_model(src).unwrap();
    let inst = &ast.instances[0];
    assert_eq!(inst.class.as_str(), "Wheel");
    assert_eq!(inst.name.as_str(), "wR");
    assert_eq!(inst.bindings.len(), 1);
    assert_eq!(inst.bindings[0].0, Connection::Wire);
    assert_eq!(inst.bindings[0].1.as_str(), "wctlrR");
    assert_eq!(inst.init_args.len(), 1);
}

#[test]
fn priority_entry_example() {
    let ast = parse_model(&fixture("bbw.hrebeca")).unwrap();
    let entry = &ast.can_spec.priorities[2];
    assert_eq!(entry.sender.as_str(), "wctlrR");
    assert_eq!(entry.receiver.as_str(), "bctlr");
    assert_eq!(entry.msgsrv.as_str(), "setWspd");
    assert_eq!(entry.value, hrbc_core::Rational::from_integer(3.into()));
}

#[test]
fn main_without_classes_is_a_parse_error() {
    let err = parse_model("main { }").unwrap_err();
    assert!(err.message.contains("softwareclass"), "{}", err.message);
}

#[test]
fn duplicate_can_priority_rejected() {
    let src = fixture("bbw.hrebeca").replace("bctlr wctlrL.applyTrq 2;", "bctlr wctlrL.applyTrq 1;");
    let ast = parse_model(&src).unwrap();
    let errs = check(&ast).unwrap_err();
    assert!(
        errs.iter().any(|d| d.message.contains("duplicate CAN priority")),
        "{:?}",
        errs
    );
}

#[test]
fn delay_in_physical_class_rejected() {
    let src = fixture("heater.hrebeca").replace("t = 20;", "t = 20; delay(0.1);");
    let ast = parse_model(&src).unwrap();
    let errs = check(&ast).unwrap_err();
    assert!(
        errs.iter()
            .any(|d| d.message.contains("delay statements are not allowed in physical classes")),
        "{:?}",
        errs
    );
}

#[test]
fn int_var_in_physical_class_rejected() {
    let src = fixture("heater.hrebeca").replace("real t;", "real t; int bad;");
    let ast = parse_model(&src).unwrap();
    let errs = check(&ast).unwrap_err();
    assert!(errs.iter().any(|d| d.message.contains("int variable 'bad'")));
}

#[test]
fn missing_initial_rejected() {
    let src = "softwareclass A { knownrebecs { } statevars { } msgsrv go() { } } main { A a ():(); }";
    let ast = parse_model(src).unwrap();
    let errs = check(&ast).unwrap_err();
    assert!(errs
        .iter()
        .any(|d| d.message.contains("no message server named 'initial'")));
}

#[test]
fn missing_can_entry_rejected() {
    let src = fixture("fault_canprio.hrebeca").replace("s r.note 1;", "");
    let ast = parse_model(&src).unwrap();
    let errs = check(&ast).unwrap_err();
    assert!(errs.iter().any(|d| d.message.contains("no priority entry")));
}

#[test]
fn int_from_continuous_rejected() {
    let src = "softwareclass A { knownrebecs { } statevars { int x; float f; } \
               msgsrv initial() { x = f; } } main { A a ():(); }";
    let ast = parse_model(src).unwrap();
    let errs = check(&ast).unwrap_err();
    assert!(errs
        .iter()
        .any(|d| d.message.contains("cannot assign a real/float expression to int")));
}

#[test]
fn tokenize_empty() {
    assert!(tokenize("").unwrap().is_empty());
}

#[test]
fn pretty_prints_empty_block_as_braces() {
    let src = "softwareclass A { knownrebecs { } statevars { } msgsrv initial() { } } main { A a ():(); }";
    let ast = parse_model(src).unwrap();
    let printed = pretty_print(&ast);
    assert!(printed.contains("msgsrv initial() { }"), "{}", printed);
}
