use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use layerflow_ffi::*;

const DAM: &str = "\
mesh.x_min = 0
mesh.x_max = 10
mesh.n_cells = 40
boundary.kind = wall
layers.n = 3
initial.kind = dam_break
initial.eta_left = 1
initial.eta_right = 0.5
initial.x0 = 5
physics.g = 9.81
controls.t_end = 0.5
";

fn last_error() -> String {
    unsafe { CStr::from_ptr(lf_last_error()) }.to_string_lossy().into_owned()
}

fn create(text: &str) -> *mut LfSimulation {
    let c = CString::new(text).unwrap();
    let mut sim = ptr::null_mut();
    let status = unsafe { lf_simulation_new(c.as_ptr(), &mut sim) };
    assert_eq!(status, LfStatus::Ok, "{}", last_error());
    assert!(!sim.is_null());
    sim
}

#[test]
fn lifecycle_conserves_mass_and_lands_on_t_end() {
    let sim = create(DAM);
    unsafe {
        assert_eq!(lf_simulation_n_cells(sim), 40);
        assert_eq!(lf_simulation_n_layers(sim), 3);
        assert_eq!(lf_simulation_t_end(sim), 0.5);

        let mut e0 = LfEnergy::default();
        assert_eq!(lf_simulation_energy(sim, &mut e0), LfStatus::Ok);

        let mut dt = 0.0;
        assert_eq!(lf_simulation_step(sim, &mut dt), LfStatus::Ok);
        assert!(dt > 0.0);
        assert_eq!(lf_simulation_time(sim), dt);

        let mut steps = 0usize;
        assert_eq!(lf_simulation_run_until(sim, 0.5, &mut steps), LfStatus::Ok);
        assert!(steps > 0);
        assert_eq!(lf_simulation_time(sim), 0.5);

        let mut e1 = LfEnergy::default();
        assert_eq!(lf_simulation_energy(sim, &mut e1), LfStatus::Ok);
        assert!(((e1.mass - e0.mass) / e0.mass).abs() < 1e-13);
        assert!(e1.total < e0.total);
        assert!(e1.exchange <= 0.0);

        let mut depth = vec![0.0; 40];
        assert_eq!(lf_simulation_depth(sim, depth.as_mut_ptr(), depth.len()), LfStatus::Ok);
        let mass: f64 = depth.iter().sum::<f64>() * 0.25;
        assert!((mass - e1.mass).abs() < 1e-12);

        let mut u = vec![0.0; 40];
        assert_eq!(lf_simulation_velocity(sim, 2, u.as_mut_ptr(), u.len()), LfStatus::Ok);
        assert!(u.iter().any(|v| *v != 0.0));
        lf_simulation_free(sim);
    }
}

#[test]
fn errors_report_codes_and_messages() {
    let bad = CString::new(DAM.replace("layers.n = 3", "layers.n = 3\nlayers.fractions = 0.5, 0.5, 0.1")).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { lf_simulation_new(bad.as_ptr(), &mut sim) }, LfStatus::Config);
    assert!(sim.is_null());
    assert!(last_error().starts_with("line "), "{}", last_error());

    assert_eq!(unsafe { lf_simulation_new(ptr::null(), &mut sim) }, LfStatus::NullPointer);
    assert_eq!(
        unsafe { lf_simulation_new(bad.as_ptr(), ptr::null_mut()) },
        LfStatus::NullPointer
    );

    let sim = create(DAM);
    unsafe {
        let mut short = vec![0.0; 10];
        assert_eq!(
            lf_simulation_depth(sim, short.as_mut_ptr(), short.len()),
            LfStatus::BufferTooSmall
        );
        assert!(last_error().contains("40"));
        let mut u = vec![0.0; 40];
        assert_eq!(lf_simulation_velocity(sim, 3, u.as_mut_ptr(), 40), LfStatus::InvalidInput);
        assert_eq!(lf_simulation_depth(sim, ptr::null_mut(), 40), LfStatus::NullPointer);
        assert_eq!(lf_simulation_run_until(sim, f64::NAN, ptr::null_mut()), LfStatus::InvalidInput);
        lf_simulation_free(sim);
        lf_simulation_free(ptr::null_mut());
        assert!(lf_simulation_time(ptr::null()).is_nan());
        assert_eq!(lf_simulation_n_cells(ptr::null()), 0);
    }
}

#[test]
fn solver_abort_maps_to_its_code() {
    let n = 5;
    let depth = vec!["1e300"; n].join(", ");
    let u = vec!["0"; n].join(", ");
    let text = format!(
        "mesh.x_min = 0\nmesh.x_max = 1\nmesh.n_cells = {n}\ninitial.kind = table\n\
         initial.depth_table = {depth}\ninitial.u_table = {u}\nphysics.g = 9.81\n"
    );
    let sim = create(&text);
    unsafe {
        assert_eq!(lf_simulation_step(sim, ptr::null_mut()), LfStatus::SolverAbort);
        assert!(last_error().contains("cell"), "{}", last_error());
        lf_simulation_free(sim);
    }
}

#[test]
fn sv1_scenarios_are_rejected() {
    let c = CString::new(format!("{DAM}solver.kind = sv1\n").replace("layers.n = 3", "layers.n = 1")).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { lf_simulation_new(c.as_ptr(), &mut sim) }, LfStatus::InvalidInput);
}

#[test]
fn status_names() {
    let name = |c: i32| unsafe { CStr::from_ptr(lf_status_name(c)) }.to_str().unwrap().to_owned();
    assert_eq!(name(LfStatus::Ok as i32), "ok");
    assert_eq!(name(LfStatus::SolverAbort as i32), "solver abort");
    assert_eq!(name(42), "unknown status");
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/layerflow.h");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{header}\"\n\
             int probe(void) {{ LfSimulation *s = 0; LfEnergy e; \
             return (int)lf_simulation_energy(s, &e) + (int)LF_STATUS_OK; }}\n"
        ),
    )
    .unwrap();
    let status = match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).status() {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler found, skipping");
            return;
        }
    };
    assert!(status.success());
}
