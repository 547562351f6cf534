use ardoc_core::{evaluate_texts, standardize, EvalOptions, MetricReport, NormalizeConfig};

const REFERENCE: &str = "# عنوان\n\nنص عربي قصير هنا.\n\n| أ | ب |\n|---|---|\n| ١ | ٢ |";

fn report(reference: &str, hypothesis: &str) -> MetricReport {
    let opts = EvalOptions::default();
    evaluate_texts(reference, hypothesis, &opts)
        .report(&opts)
        .unwrap()
}

#[test]
fn self_prediction_is_perfect() {
    let r = report(REFERENCE, REFERENCE);
    assert_eq!((r.wer, r.cer), (0.0, 0.0));
    assert_eq!((r.bleu, r.chrf, r.teds, r.mars), (100.0, 100.0, 100.0, 100.0));
}

#[test]
fn empty_prediction_scores_zero() {
    let r = report(REFERENCE, "");
    assert_eq!((r.wer, r.cer), (1.0, 1.0));
    assert_eq!((r.bleu, r.chrf), (0.0, 0.0));
}

#[test]
fn html_table_matches_pipe_table() {
    let html = "# عنوان\n\nنص عربي قصير هنا.\n\n\
                <table><tr><td>أ</td><td>ب</td></tr><tr><td>١</td><td>٢</td></tr></table>";
    assert_eq!(report(REFERENCE, html), report(REFERENCE, REFERENCE));
}

#[test]
fn erased_markup_does_not_change_scores() {
    let noisy = "عنوان\n=====\n\n<div>نص <watermark>مسودة</watermark>عربي قصير هنا.</div>\n\n\
                 | أ | ب |\n|---|---|\n| ١ | ٢ |\n\n<page_number>7</page_number>";
    assert_eq!(report(REFERENCE, noisy), report(REFERENCE, REFERENCE));
}

#[test]
fn single_substitutions() {
    // One of four words, one of four letters.
    assert_eq!(report("أ ب ت ث", "أ ب ج ث").wer, 0.25);
    assert_eq!(report("ابتث", "ابجث").cer, 0.25);
}

#[test]
fn standardize_reaches_fixpoint_on_examples() {
    let cfg = NormalizeConfig::default();
    for raw in [
        REFERENCE,
        "<table><tr><td><strong>x</strong><watermark></td></tr></table>\n***",
        "<page_number><img src=\"a.png\"/>|\r\n===",
    ] {
        let once = standardize(raw, &cfg);
        assert_eq!(standardize(&once, &cfg), once, "{raw:?}");
    }
}
