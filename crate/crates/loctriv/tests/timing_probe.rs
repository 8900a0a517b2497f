use loctriv::budget::RunCtx;
use loctriv::corpus;
use loctriv::opfib::verify;

#[test]
#[ignore]
fn z6_full_window_timing() {
    let ctx = RunCtx::default();
    let t0 = std::time::Instant::now();
    let opf = corpus::z6_opfib(36);
    let t = std::time::Instant::now();
    let rep = verify::verify_opfibration(&ctx, &opf);
    println!("opfibration: {:?} passed={}", t.elapsed(), rep.passed());
    assert!(rep.passed(), "{rep}");
    let t = std::time::Instant::now();
    let rep = verify::verify_monoidal_opfibration(&ctx, &opf);
    println!("monoidal: {:?} passed={}", t.elapsed(), rep.passed());
    assert!(rep.passed(), "{rep}");
    let t = std::time::Instant::now();
    let rep = verify::verify_symmetry(&ctx, &opf);
    println!("symmetry: {:?} passed={}", t.elapsed(), rep.passed());
    assert!(rep.passed(), "{rep}");
    println!("total: {:?}", t0.elapsed());
}
