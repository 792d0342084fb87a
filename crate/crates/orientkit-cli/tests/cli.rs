//! End-to-end tests of the `orientkit` binary: spec'd examples, the exit-code
//! contract, result re-verifiability, generation families, and DOT output.

use std::path::{Path, PathBuf};
use std::process::Command;

use num_rational::Rational64;

use orientkit::graph::satisfied_pair_indices;
use orientkit_cli::instance::{orientation_from_map, CostValue, InstanceFile, ResultFile};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_orientkit"));
    c.env_remove("ORIENTKIT_THREADS");
    c
}

fn run(args: &[&str]) -> Run {
    let out = bin().args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("binary exits normally"),
        stdout: String::from_utf8(out.stdout).expect("stdout is UTF-8"),
        stderr: String::from_utf8(out.stderr).expect("stderr is UTF-8"),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn result_of(run: &Run) -> ResultFile {
    serde_json::from_str(&run.stdout).expect("stdout is a result file")
}

#[test]
fn k_pairs_example_path_with_both_directions_is_yes_for_k_1() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "path.json",
        r#"{"nodes": 3, "edges": [{"u":0,"v":1},{"u":1,"v":2}], "pairs": [[0,2],[2,0]], "k": 1}"#,
    );
    let r = run(&["k-pairs", "--in", inst.to_str().unwrap(), "--oracle-check"]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let rf = result_of(&r);
    assert_eq!(rf.status, "yes");
    assert!(rf.value.unwrap() >= 1);
    // k = 2 is impossible on a path demanded in both directions.
    let r2 = run(&["k-pairs", "--in", inst.to_str().unwrap(), "--k", "2", "--oracle-check"]);
    assert_eq!(r2.code, 2);
}

#[test]
fn steiner_example_unit_triangle_both_directions_costs_3() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "tri.json",
        r#"{"nodes": 3, "edges": [{"u":0,"v":1},{"u":1,"v":2},{"u":2,"v":0}],
            "pairs": [[0,1],[1,0]]}"#,
    );
    let r = run(&["steiner-orient", "--in", inst.to_str().unwrap(), "--oracle-check"]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let rf = result_of(&r);
    assert_eq!(rf.status, "ok");
    assert_eq!(rf.cost, Some(CostValue::Int(3)));
    assert_eq!(rf.satisfied_pairs, vec![0, 1]);
}

#[test]
fn gen_with_same_seed_is_byte_identical_and_seeds_differ() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    let out3 = dir.path().join("c.json");
    assert_eq!(run(&["gen", "random-connected", "--seed", "7", "--out", out1.to_str().unwrap()]).code, 0);
    assert_eq!(run(&["gen", "random-connected", "--seed", "7", "--out", out2.to_str().unwrap()]).code, 0);
    assert_eq!(run(&["gen", "random-connected", "--seed", "8", "--out", out3.to_str().unwrap()]).code, 0);
    let b1 = std::fs::read(&out1).unwrap();
    let b2 = std::fs::read(&out2).unwrap();
    let b3 = std::fs::read(&out3).unwrap();
    assert_eq!(b1, b2, "same seed must reproduce identical bytes");
    assert_ne!(b1, b3, "different seeds should differ");
}

#[test]
fn gen_families_produce_valid_instances() {
    let dir = tempfile::tempdir().unwrap();
    for (family, nodes) in
        [("tree", 10), ("random-connected", 8), ("mixed-dag-overlay", 9), ("two-terminal", 5)]
    {
        for seed in 0..5 {
            let out = dir.path().join(format!("{family}-{seed}.json"));
            let r = run(&[
                "gen",
                family,
                "--seed",
                &seed.to_string(),
                "--nodes",
                &nodes.to_string(),
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(r.code, 0, "{family} seed {seed} failed: {}", r.stderr);
            let inst: InstanceFile =
                serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
            let (g, _) = inst.to_graph(true).expect("generated instance is valid");
            match family {
                "tree" => {
                    assert_eq!(g.edge_count(), nodes - 1);
                    let comp = g.undirected_components();
                    assert!(comp.iter().all(|&c| c == comp[0]), "tree must be connected");
                }
                "random-connected" => {
                    let comp = g.undirected_components();
                    assert!(comp.iter().all(|&c| c == comp[0]), "graph must be connected");
                    assert!(g.edge_count() <= 14);
                }
                "mixed-dag-overlay" => {
                    use orientkit::graph::{topological_order, MixedGraph, TopologicalOrder};
                    let comp = g.undirected_components();
                    let groups = comp.iter().copied().max().map_or(0, |m| m + 1);
                    let mut contracted = MixedGraph::new(groups);
                    for a in g.arcs() {
                        contracted.add_arc(comp[a.tail], comp[a.head]).unwrap();
                    }
                    assert!(matches!(topological_order(&contracted), TopologicalOrder::Order(_)));
                }
                "two-terminal" => {
                    assert_eq!(inst.s, Some(0));
                    assert_eq!(inst.t, Some(nodes - 1));
                    assert_eq!(inst.ell, Some(2));
                    assert!(inst.pairs.is_empty());
                }
                _ => unreachable!(),
            }
        }
    }
}

#[test]
fn two_terminal_seeds_mix_feasible_and_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let mut codes = Vec::new();
    for seed in 0..14 {
        let inst = dir.path().join(format!("tt-{seed}.json"));
        assert_eq!(
            run(&[
                "gen",
                "two-terminal",
                "--seed",
                &seed.to_string(),
                "--nodes",
                "5",
                "--out",
                inst.to_str().unwrap(),
            ])
            .code,
            0
        );
        let r = run(&[
            "disjoint-paths",
            "--in",
            inst.to_str().unwrap(),
            "--oracle-check",
            "--out",
            dir.path().join(format!("tt-{seed}-result.json")).to_str().unwrap(),
        ]);
        assert!([0, 2].contains(&r.code), "seed {seed}: unexpected exit {}: {}", r.code, r.stderr);
        codes.push(r.code);
    }
    assert!(codes.contains(&0), "some seed must be feasible");
    assert!(codes.contains(&2), "some seed must be infeasible");
}

#[test]
fn exit_code_contract_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"nodes": 2, "bogus": 1}"#);
    assert_eq!(run(&["oracle", "--in", bad.to_str().unwrap()]).code, 1, "unknown field");

    let not_json = write(dir.path(), "text.json", "not json at all");
    assert_eq!(run(&["oracle", "--in", not_json.to_str().unwrap()]).code, 1, "parse error");

    let missing = dir.path().join("does-not-exist.json");
    assert_eq!(run(&["oracle", "--in", missing.to_str().unwrap()]).code, 1, "missing file");

    let with_arcs = write(
        dir.path(),
        "arcs.json",
        r#"{"nodes": 2, "edges": [], "arcs": [{"tail":0,"head":1}], "pairs": []}"#,
    );
    assert_eq!(
        run(&["steiner-orient", "--in", with_arcs.to_str().unwrap()]).code,
        1,
        "arcs only allowed for mixed-orient and oracle"
    );
    assert_eq!(run(&["oracle", "--in", with_arcs.to_str().unwrap()]).code, 0);

    let path = write(
        dir.path(),
        "path.json",
        r#"{"nodes": 3, "edges": [{"u":0,"v":1},{"u":1,"v":2}], "pairs": [[0,2],[2,0]]}"#,
    );
    assert_eq!(run(&["k-pairs", "--in", path.to_str().unwrap()]).code, 1, "k missing");
    assert_eq!(run(&["k-pairs", "--in", path.to_str().unwrap(), "--k", "2"]).code, 2, "infeasible");

    let wide = write(
        dir.path(),
        "wide.json",
        r#"{"nodes": 4, "edges": [{"u":0,"v":1},{"u":0,"v":1},{"u":1,"v":2},{"u":1,"v":2},
            {"u":2,"v":3},{"u":2,"v":3}], "pairs": [[0,3]]}"#,
    );
    assert_eq!(
        run(&["oracle", "--in", wide.to_str().unwrap(), "--cap-edges", "3"]).code,
        4,
        "edge cap exceeded"
    );

    let many_pairs = write(
        dir.path(),
        "many.json",
        r#"{"nodes": 3, "edges": [{"u":0,"v":1},{"u":1,"v":2}],
            "pairs": [[0,1],[1,0],[0,2],[2,0],[1,2]]}"#,
    );
    assert_eq!(
        run(&["mixed-orient", "--in", many_pairs.to_str().unwrap()]).code,
        4,
        "mixed pair cap (default 4) exceeded"
    );
    assert_eq!(
        run(&["mixed-orient", "--in", many_pairs.to_str().unwrap(), "--cap-pairs", "5"]).code,
        2,
        "raised cap lets the decision run; this instance is a NO"
    );

    // Flag errors are malformed input, not clap's default exit 2.
    let r = run(&["k-pairs", "--no-such-flag"]);
    assert_eq!(r.code, 1, "unknown flag is malformed input");
    assert_eq!(run(&["no-such-subcommand"]).code, 1);
    assert_eq!(run(&["--help"]).code, 0);

    let mut c = bin();
    c.args(["oracle", "--in", path.to_str().unwrap()]).env("ORIENTKIT_THREADS", "zero");
    assert_eq!(c.output().unwrap().status.code().unwrap(), 1, "bad thread env");
}

#[test]
fn disjoint_paths_validates_its_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let with_pairs = write(
        dir.path(),
        "wp.json",
        r#"{"nodes": 2, "edges": [{"u":0,"v":1}], "pairs": [[0,1]], "s":0, "t":1, "ell":1}"#,
    );
    assert_eq!(run(&["disjoint-paths", "--in", with_pairs.to_str().unwrap()]).code, 1);

    let plain = write(
        dir.path(),
        "plain.json",
        r#"{"nodes": 2, "edges": [{"u":0,"v":1},{"u":0,"v":1}]}"#,
    );
    let p = plain.to_str().unwrap();
    assert_eq!(run(&["disjoint-paths", "--in", p]).code, 1, "s/t/ell all missing");
    assert_eq!(run(&["disjoint-paths", "--in", p, "--s", "0", "--t", "1"]).code, 1, "ell missing");
    assert_eq!(
        run(&["disjoint-paths", "--in", p, "--s", "0", "--t", "1", "--ell", "0"]).code,
        1,
        "ell must be at least 1"
    );
    assert_eq!(
        run(&["disjoint-paths", "--in", p, "--s", "0", "--t", "0", "--ell", "1"]).code,
        1,
        "terminals must differ"
    );
    assert_eq!(
        run(&["disjoint-paths", "--in", p, "--s", "0", "--t", "1", "--ell", "1", "--oracle-check"])
            .code,
        0,
        "two parallel edges carry one path each way"
    );
}

#[test]
fn results_re_verify_from_instance_plus_orientation() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..8 {
        let inst_path = dir.path().join(format!("inst-{seed}.json"));
        assert_eq!(
            run(&[
                "gen",
                "random-connected",
                "--seed",
                &seed.to_string(),
                "--nodes",
                "7",
                "--out",
                inst_path.to_str().unwrap(),
            ])
            .code,
            0
        );
        let inst: InstanceFile =
            serde_json::from_str(&std::fs::read_to_string(&inst_path).unwrap()).unwrap();
        let (g, pairs) = inst.to_graph(false).unwrap();

        let r = run(&["max-orient", "--in", inst_path.to_str().unwrap(), "--oracle-check"]);
        assert_eq!(r.code, 0, "seed {seed}: {}", r.stderr);
        let rf = result_of(&r);
        let o = orientation_from_map(&rf.orientation, g.edge_count()).unwrap();
        let sat = satisfied_pair_indices(&g, Some(&o), &pairs).unwrap();
        assert_eq!(sat, rf.satisfied_pairs, "seed {seed}: satisfied pairs re-verify");
        assert_eq!(rf.value, Some(sat.len()));
        assert!(sat.len() >= rf.certified_bound.unwrap());

        let r = run(&["steiner-orient", "--in", inst_path.to_str().unwrap(), "--oracle-check"]);
        if r.code == 2 {
            continue; // a both-ways demand over a bridge; nothing to re-verify
        }
        assert_eq!(r.code, 0, "seed {seed}: {}", r.stderr);
        let rf = result_of(&r);
        let o = orientation_from_map(&rf.orientation, g.edge_count()).unwrap();
        let sat = satisfied_pair_indices(&g, Some(&o), &pairs).unwrap();
        assert_eq!(sat.len(), pairs.len(), "seed {seed}: every pair satisfied");
        let transcript = rf.transcript.unwrap();
        let h_edges: Vec<usize> =
            serde_json::from_value(transcript["h_edges"].clone()).unwrap();
        let total = g.cost_of(&h_edges);
        assert_eq!(
            rf.cost.unwrap().to_rational().unwrap(),
            total,
            "seed {seed}: cost re-sums from the bought edges"
        );
    }
}

#[test]
fn kernel_reports_its_bound_and_embeds_the_reduced_instance() {
    let dir = tempfile::tempdir().unwrap();
    // Two triangles joined by a path: the triangles contract away.
    let inst = write(
        dir.path(),
        "kern.json",
        r#"{"nodes": 7,
            "edges": [{"u":0,"v":1},{"u":1,"v":2},{"u":2,"v":0},
                      {"u":2,"v":3},{"u":3,"v":4},
                      {"u":4,"v":5},{"u":5,"v":6},{"u":6,"v":4}],
            "pairs": [[0,5],[6,1]]}"#,
    );
    let r = run(&["kernel", "--in", inst.to_str().unwrap(), "--oracle-check"]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let rf = result_of(&r);
    assert_eq!(rf.status, "ok");
    let size = rf.value.unwrap();
    let transcript = rf.transcript.unwrap();
    let embedded: InstanceFile =
        serde_json::from_value(transcript["instance"].clone()).unwrap();
    let (kg, kp) = embedded.to_graph(false).expect("embedded kernel instance is valid");
    assert_eq!(kg.node_count(), size);
    let p_prime = kp.len();
    assert!(p_prime == 0 && size == 0 || size <= 3 * p_prime - 1, "bound holds");
}

#[test]
fn dot_exports_are_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(
        dir.path(),
        "tri.json",
        r#"{"nodes": 3, "edges": [{"u":0,"v":1},{"u":1,"v":2},{"u":2,"v":0}],
            "pairs": [[0,1],[1,0]]}"#,
    );
    let dot_path = dir.path().join("tri.dot");
    let r = run(&[
        "steiner-orient",
        "--in",
        tri.to_str().unwrap(),
        "--out",
        dir.path().join("tri-result.json").to_str().unwrap(),
        "--dot",
        dot_path.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    let text = std::fs::read_to_string(&dot_path).unwrap();
    assert!(text.starts_with("digraph orientkit {\n"));
    assert!(text.ends_with("}\n"));
    assert!(!text.contains("dir=none"), "solved output orients every edge");
    assert_eq!(text.matches("style=dashed").count(), 2, "one dashed arc per demand");

    // An empty graph still renders valid DOT.
    let empty = write(dir.path(), "empty.json", r#"{"nodes": 0}"#);
    let empty_dot = dir.path().join("empty.dot");
    let r = run(&[
        "oracle",
        "--in",
        empty.to_str().unwrap(),
        "--out",
        dir.path().join("empty-result.json").to_str().unwrap(),
        "--dot",
        empty_dot.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(std::fs::read_to_string(&empty_dot).unwrap(), "digraph orientkit {\n}\n");

    // Unsolved instances keep undirected edges undirected.
    let gen_dot = dir.path().join("gen.dot");
    let r = run(&[
        "gen",
        "tree",
        "--nodes",
        "4",
        "--seed",
        "3",
        "--out",
        dir.path().join("gen.json").to_str().unwrap(),
        "--dot",
        gen_dot.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    let text = std::fs::read_to_string(&gen_dot).unwrap();
    assert_eq!(text.matches("dir=none").count(), 3);
}

#[test]
fn stdout_mode_and_seed_flag_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "p.json",
        r#"{"nodes": 3, "edges": [{"u":0,"v":1},{"u":1,"v":2}], "pairs": [[0,2]]}"#,
    );
    let a = run(&["max-orient", "--in", inst.to_str().unwrap(), "--seed", "1"]);
    let b = run(&["max-orient", "--in", inst.to_str().unwrap(), "--seed", "999"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout, "solvers are deterministic; the seed changes nothing");
    let rf = result_of(&a);
    assert_eq!(rf.status, "ok");
    assert_eq!(rf.value, Some(1));
}

#[test]
fn mixed_orient_uses_arcs_and_rejects_cost_abuse() {
    let dir = tempfile::tempdir().unwrap();
    // The arc 3->0 closes a cycle, so both (0,2) and (2,0) become satisfiable.
    let inst = write(
        dir.path(),
        "mixed.json",
        r#"{"nodes": 4, "edges": [{"u":0,"v":1},{"u":1,"v":2},{"u":2,"v":3}],
            "arcs": [{"tail":3,"head":0}], "pairs": [[0,2],[2,0]]}"#,
    );
    let r = run(&["mixed-orient", "--in", inst.to_str().unwrap(), "--oracle-check"]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let rf = result_of(&r);
    assert_eq!(rf.status, "yes");
    assert_eq!(rf.satisfied_pairs, vec![0, 1]);

    let frac = write(
        dir.path(),
        "frac.json",
        r#"{"nodes": 2, "edges": [{"u":0,"v":1,"cost":"3/2"},{"u":0,"v":1,"cost":"1/2"}],
            "s":0, "t":1, "ell":1}"#,
    );
    let r = run(&["disjoint-paths", "--in", frac.to_str().unwrap(), "--oracle-check"]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let rf = result_of(&r);
    assert_eq!(rf.cost, Some(CostValue::Int(2)), "3/2 + 1/2 sums to 2 exactly");

    let bad_cost = write(
        dir.path(),
        "badcost.json",
        r#"{"nodes": 2, "edges": [{"u":0,"v":1,"cost":"1/0"}], "pairs": []}"#,
    );
    assert_eq!(run(&["oracle", "--in", bad_cost.to_str().unwrap()]).code, 1);
    let neg = write(
        dir.path(),
        "neg.json",
        r#"{"nodes": 2, "edges": [{"u":0,"v":1,"cost":-2}], "pairs": []}"#,
    );
    assert_eq!(run(&["oracle", "--in", neg.to_str().unwrap()]).code, 1);
}

#[test]
fn oracle_check_catches_nothing_on_honest_runs() {
    // A sweep over generated instances with --oracle-check must never exit 3:
    // the solvers' guarantees hold, and the checks are wired correctly.
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..6 {
        let inst = dir.path().join(format!("sweep-{seed}.json"));
        assert_eq!(
            run(&[
                "gen",
                "random-connected",
                "--seed",
                &(100 + seed).to_string(),
                "--nodes",
                "6",
                "--cap-edges",
                "10",
                "--out",
                inst.to_str().unwrap(),
            ])
            .code,
            0
        );
        let p = inst.to_str().unwrap();
        for cmd in ["max-orient", "kernel", "oracle", "steiner-orient"] {
            let r = run(&[cmd, "--in", p, "--oracle-check"]);
            assert_ne!(r.code, 3, "{cmd} seed {seed} oracle disagreement: {}", r.stderr);
            assert!([0, 2].contains(&r.code), "{cmd} seed {seed}: exit {}", r.code);
        }
        let r = run(&["k-pairs", "--in", p, "--k", "1", "--oracle-check"]);
        assert!([0, 2].contains(&r.code));
        let r = run(&["mixed-orient", "--in", p, "--oracle-check"]);
        assert!([0, 2, 4].contains(&r.code), "pair cap may trip on 4+ pairs");
    }
}

#[test]
fn atomic_write_replaces_existing_output() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "i.json",
        r#"{"nodes": 2, "edges": [{"u":0,"v":1}], "pairs": [[0,1]]}"#,
    );
    let out = dir.path().join("result.json");
    std::fs::write(&out, "stale garbage").unwrap();
    let r = run(&[
        "max-orient",
        "--in",
        inst.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    let rf: ResultFile =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rf.status, "ok");
    assert!(
        !dir.path().join("result.json.tmp").exists(),
        "temp file is renamed away"
    );
}

#[test]
fn infeasible_steiner_still_writes_a_result_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "bridge.json",
        r#"{"nodes": 2, "edges": [{"u":0,"v":1}], "pairs": [[0,1],[1,0]]}"#,
    );
    let out = dir.path().join("r.json");
    let r = run(&[
        "steiner-orient",
        "--in",
        inst.to_str().unwrap(),
        "--oracle-check",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 2);
    let rf: ResultFile =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rf.status, "infeasible");
    assert!(rf.orientation.is_empty());

    // Disconnected demand: also infeasible, different reason.
    let disc = write(
        dir.path(),
        "disc.json",
        r#"{"nodes": 3, "edges": [{"u":0,"v":1}], "pairs": [[0,2]]}"#,
    );
    let r = run(&["steiner-orient", "--in", disc.to_str().unwrap(), "--oracle-check"]);
    assert_eq!(r.code, 2);
    let rf = result_of(&r);
    assert_eq!(rf.status, "infeasible");
}

#[test]
fn fractional_costs_round_trip_through_results() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "half.json",
        r#"{"nodes": 3, "edges": [{"u":0,"v":1,"cost":"1/2"},{"u":1,"v":2,"cost":"1/3"}],
            "pairs": [[0,2]]}"#,
    );
    let r = run(&["steiner-orient", "--in", inst.to_str().unwrap(), "--oracle-check"]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let rf = result_of(&r);
    assert_eq!(
        rf.cost.unwrap().to_rational().unwrap(),
        Rational64::new(5, 6),
        "1/2 + 1/3 reported exactly"
    );
}
