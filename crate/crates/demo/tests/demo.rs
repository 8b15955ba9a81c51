use tmae_demo::{phase1_input, rank_correlation, topic_similarity};

#[test]
fn phase1_input_encodes_the_document_union() {
    let out = phase1_input("b a c\nd b", "b", 25, true, 0).unwrap();
    assert!(out.contains("\"documents\":[0,1]") || out.contains("\"documents\":[1,0]"), "{out}");
    assert!(out.contains("\"bits\":[1,1,1,1,0,0,0,0]"), "{out}");
    assert!(out.contains("\"¬a\""));
    assert!(phase1_input("a b", "zebra", 3, true, 0).unwrap_err().contains("zebra"));
    assert!(phase1_input("a b", "a", 3, false, 0).unwrap_err().contains("non-supporting"));
}

#[test]
fn topic_heatmap_has_a_square_matrix() {
    let out = topic_similarity(2, 6, 200, 1).unwrap();
    let rows = out.matches("],[").count() + 1;
    assert_eq!(rows, 12, "{out}");
    assert!(out.contains("\"spearman\":"));
    assert_eq!(out, topic_similarity(2, 6, 200, 1).unwrap());
    assert!(topic_similarity(9, 6, 200, 1).is_err());
}

#[test]
fn rank_metrics_fixture() {
    let out = rank_correlation("1, 2, 3, 4", "1 3 2 4").unwrap();
    let field = |key: &str| -> f64 {
        let rest = &out[out.find(key).unwrap() + key.len() + 2..];
        rest[..rest.find([',', '}']).unwrap()].parse().unwrap()
    };
    assert!((field("\"spearman") - 0.8).abs() < 1e-9, "{out}");
    assert!((field("\"kendall") - 4.0 / 6.0).abs() < 1e-9, "{out}");
    assert!(rank_correlation("1 1 1", "1 2 3").unwrap_err().contains("undefined"));
    assert!(rank_correlation("1 x", "1 2").is_err());
}
