use u2metric::catalog::{catalog_get, entries, entry, listing, tag_predicates, Params};
use u2metric::classify::{classify, ClassifyOptions};
use u2metric::{Coef, Error};

fn params(kv: &[(&str, Coef)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn assert_tags(name: &str, p: &Params) {
    let e = entry(name).unwrap();
    let m = e.build(p).unwrap();
    let r = classify(&m, &ClassifyOptions::default()).unwrap();
    for tag in e.expected_tags(p).unwrap() {
        for any in tag_predicates(tag).unwrap() {
            assert!(any.iter().any(|q| r.holds(q)), "{name} {p:?}: {tag} needs {any:?}");
        }
    }
}

#[test]
fn tags_survive_parameter_changes() {
    for m in [Coef::ratio(1, 2), Coef::int(3)] {
        for name in ["taub-nut", "taub-bolt", "burns", "eguchi-hanson", "super-eguchi-hanson"] {
            if entry(name).unwrap().params.iter().any(|s| s.name == "m") {
                assert_tags(name, &params(&[("m", m.clone())]));
            }
        }
    }
    for c0 in [Coef::ratio(1, 3), Coef::int(4)] {
        for name in ["modified-taub-nut-1", "modified-taub-nut-2", "modified-taub-bolt-1", "modified-taub-bolt-2"] {
            assert_tags(name, &params(&[("C0", c0.clone())]));
        }
    }
    for k in 1..=4 {
        assert_tags("lebrun", &params(&[("k", Coef::int(k))]));
        assert_tags("modified-lebrun", &params(&[("k", Coef::int(k))]));
    }
    for k in 2..=5 {
        assert_tags("eguchi-hanson-lambda", &params(&[("k", Coef::int(k))]));
    }
    for lambda in [Coef::int(1), Coef::int(12)] {
        for name in ["fubini-study", "page"] {
            assert_tags(name, &params(&[("Lambda", lambda.clone())]));
        }
    }
}

#[test]
fn conditional_tags_follow_parameters() {
    let rf = |k| {
        let m = catalog_get("lebrun", &params(&[("k", Coef::int(k))])).unwrap();
        classify(&m, &ClassifyOptions::default()).unwrap().holds("ricci_flat")
    };
    assert!(rf(2) && !rf(1) && !rf(3));
    let csc = |k| {
        let m = catalog_get("modified-lebrun", &params(&[("k", Coef::int(k))])).unwrap();
        classify(&m, &ClassifyOptions::default()).unwrap().holds("csc")
    };
    assert!(csc(1) && !csc(2));
}

#[test]
fn bad_parameters_are_rejected() {
    let err = |name: &str, kv: &[(&str, Coef)]| catalog_get(name, &params(kv)).unwrap_err();
    assert!(matches!(err("taub-bolt", &[("m", Coef::int(-1))]), Error::BadParameter { .. }));
    assert!(matches!(err("lebrun", &[("k", Coef::ratio(3, 2))]), Error::BadParameter { .. }));
    assert!(matches!(err("flat", &[("m", Coef::int(1))]), Error::BadParameter { .. }));
    assert!(matches!(catalog_get("nonesuch", &Params::new()), Err(Error::UnknownMetric(_))));
}

#[test]
fn listing_has_one_line_per_entry() {
    let text = listing();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), entries().len());
    for (line, e) in lines.iter().zip(entries()) {
        assert!(line.starts_with(e.name));
        assert_eq!(line.split(" | ").count(), 4, "{line}");
    }
}
