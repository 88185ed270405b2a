use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use polycap_ffi::*;

fn last_error() -> String {
    let p = pc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn load(name: &str) -> *mut PcModel {
    let path = CString::new(name).unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { pc_model_load(path.as_ptr(), &mut model) }, PcStatus::Ok);
    model
}

fn vertices(set: *const PcVertexSet) -> Vec<Vec<f64>> {
    let (len, dim) = unsafe { (pc_vertex_set_len(set), pc_vertex_set_dim(set)) };
    let mut buf = vec![0.0; len * dim];
    assert_eq!(unsafe { pc_vertex_set_copy(set, buf.as_mut_ptr(), buf.len()) }, PcStatus::Ok);
    buf.chunks(dim).map(|c| c.to_vec()).collect()
}

#[test]
fn force_polytope_matches_library() {
    let model = load("planar2r.json");
    assert_eq!(unsafe { pc_model_dof(model) }, 2);
    let q = [0.0, 1.5];
    let axes = CString::new("x,y").unwrap();
    let mut set = ptr::null_mut();
    let status = unsafe { pc_force_polytope(model, q.as_ptr(), q.len(), axes.as_ptr(), &mut set) };
    assert_eq!(status, PcStatus::Ok);
    assert!(pc_last_error().is_null());

    let m = polycap::describe("planar2r.json").unwrap();
    let j = polycap::jacobian(&m, &polycap::JointConfig::new(q.to_vec()), &polycap::TaskFrame::planar()).unwrap();
    let (lo, hi) = m.torque_limits();
    let expected = polycap::force_polytope_vertices(&j, &polycap::JointBox::new(lo, hi).unwrap(), &Default::default()).unwrap();
    assert_eq!(vertices(set), expected.vertices);
    assert_eq!(vertices(set).len(), 4);
    unsafe {
        pc_vertex_set_free(set);
        pc_model_free(model);
    }
}

#[test]
fn raw_jacobian_and_velocity() {
    let jac = [1.0, 0.0, 0.0, 1.0];
    let (lo, hi) = ([-1.0, -2.0], [1.0, 2.0]);
    let mut set = ptr::null_mut();
    let status = unsafe { pc_force_polytope_raw(jac.as_ptr(), 2, 2, lo.as_ptr(), hi.as_ptr(), &mut set) };
    assert_eq!(status, PcStatus::Ok);
    assert_eq!(vertices(set), vec![vec![-1.0, -2.0], vec![-1.0, 2.0], vec![1.0, -2.0], vec![1.0, 2.0]]);
    unsafe { pc_vertex_set_free(set) };

    let model = load("panda7.json");
    let q = [0.0, 0.3, 0.0, -1.8, 0.0, 2.1, 0.8];
    let mut vel = ptr::null_mut();
    assert_eq!(unsafe { pc_velocity_polytope(model, q.as_ptr(), 7, ptr::null(), &mut vel) }, PcStatus::Ok);
    assert_eq!(unsafe { pc_vertex_set_dim(vel) }, 3);
    assert!(unsafe { pc_vertex_set_len(vel) } > 0);
    unsafe {
        pc_vertex_set_free(vel);
        pc_model_free(model);
    }
}

#[test]
fn error_codes() {
    let model = load("planar2r.json");
    let mut set = ptr::null_mut();
    let singular = [0.0, 0.0];
    let status = unsafe { pc_force_polytope(model, singular.as_ptr(), 2, ptr::null(), &mut set) };
    assert_eq!(status, PcStatus::RankDeficient);
    assert!(last_error().contains("rank-deficient"));
    assert!(set.is_null());

    let short = [0.1];
    assert_eq!(unsafe { pc_force_polytope(model, short.as_ptr(), 1, ptr::null(), &mut set) }, PcStatus::InvalidInput);
    let bad_axes = CString::new("x,w").unwrap();
    let q = [0.1, 0.9];
    assert_eq!(unsafe { pc_force_polytope(model, q.as_ptr(), 2, bad_axes.as_ptr(), &mut set) }, PcStatus::InvalidInput);
    assert_eq!(unsafe { pc_force_polytope(ptr::null(), q.as_ptr(), 2, ptr::null(), &mut set) }, PcStatus::NullPointer);
    assert_eq!(unsafe { pc_force_polytope(model, q.as_ptr(), 2, ptr::null(), ptr::null_mut()) }, PcStatus::NullPointer);

    let missing = CString::new("/nonexistent/robot.json").unwrap();
    let mut m2 = ptr::null_mut();
    assert_eq!(unsafe { pc_model_load(missing.as_ptr(), &mut m2) }, PcStatus::InvalidInput);

    assert_eq!(unsafe { pc_force_polytope(model, q.as_ptr(), 2, ptr::null(), &mut set) }, PcStatus::Ok);
    let mut tiny = [0.0; 3];
    assert_eq!(unsafe { pc_vertex_set_copy(set, tiny.as_mut_ptr(), tiny.len()) }, PcStatus::InvalidInput);
    assert!(last_error().contains("need 8"));
    unsafe {
        pc_vertex_set_free(set);
        pc_model_free(model);
        pc_vertex_set_free(ptr::null_mut());
        pc_model_free(ptr::null_mut());
    }
    assert_eq!(unsafe { pc_model_dof(ptr::null()) }, 0);
}

#[test]
fn lambda_policy_codes() {
    let mut l = 0.0;
    assert_eq!(unsafe { pc_lambda_policy(30.0, 10.0, &mut l) }, PcStatus::Ok);
    assert_eq!(l, 0.75);
    assert_eq!(unsafe { pc_lambda_policy(0.0, 0.0, &mut l) }, PcStatus::Capacity);
    assert_eq!(unsafe { pc_lambda_policy(-1.0, 1.0, &mut l) }, PcStatus::InvalidInput);
    assert_eq!(unsafe { pc_lambda_policy(1.0, 1.0, ptr::null_mut()) }, PcStatus::NullPointer);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/polycap.h")).unwrap();
    for name in [
        "typedef struct PcModel PcModel;",
        "typedef struct PcVertexSet PcVertexSet;",
        "PC_STATUS_RANK_DEFICIENT = 2",
        "pc_model_load(",
        "pc_force_polytope_raw(",
        "pc_vertex_set_copy(",
        "pc_lambda_policy(",
        "pc_last_error(void)",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

/// Compiles and runs a small C program against the static library when a
/// C compiler is on PATH.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler found, C smoke test not run");
        return;
    };
    assert!(cc.status.success());
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib_dir = deps.parent().unwrap();
    assert!(lib_dir.join("libpolycap_ffi.a").exists(), "static library not built");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "polycap.h"
int main(void) {
    double jac[6] = {1, 0, 1, 0, 1, 1};
    double lo[3] = {-1, -1, -1}, hi[3] = {1, 1, 1};
    PcVertexSet *set = NULL;
    if (pc_force_polytope_raw(jac, 2, 3, lo, hi, &set) != PC_STATUS_OK) return 1;
    size_t n = pc_vertex_set_len(set);
    double buf[64];
    if (pc_vertex_set_copy(set, buf, 64) != PC_STATUS_OK) return 2;
    printf("%zu %g %g\n", n, buf[0], buf[1]);
    pc_vertex_set_free(set);
    double l;
    if (pc_lambda_policy(0, 0, &l) != PC_STATUS_CAPACITY) return 3;
    printf("%s\n", pc_last_error());
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let build = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include"))
        .arg(lib_dir.join("libpolycap_ffi.a"))
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success());
    let out = String::from_utf8(run.stdout).unwrap();
    let mut lines = out.lines();
    let first: Vec<&str> = lines.next().unwrap().split(' ').collect();
    let n: usize = first[0].parse().unwrap();
    assert!(n >= 4);
    assert!(lines.next().unwrap().contains("capacity"));
}
