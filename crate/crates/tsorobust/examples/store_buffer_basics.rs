//! Step the TSO machine by hand: issue into the buffer, forward reads from
//! it, watch the fence wait for the drain.
//!
//!     cargo run -p tsorobust --example store_buffer_basics

use tsorobust::lang::parse_program;
use tsorobust::tso::{tso_enabled, tso_initial};

const SOURCE: &str = "
program demo
domain 0..3;
vars x y;

thread t
  regs a;
  init l0;
  begin
    l0: x := 1; goto l1;
    l1: x := 2; goto l2;
    l2: a := x; goto l3;
    l3: fence; goto l4;
    l4: a := y; goto fin;
  end
";

fn main() {
    let p = parse_program(SOURCE).expect("parses");
    let mut state = tso_initial(&p);
    let buf_cap = 4;

    println!("each step shows the chosen transition and the buffer afterwards\n");
    loop {
        let succs = tso_enabled(&p, &state, buf_cap);
        if succs.is_empty() {
            break;
        }
        // Prefer instruction steps over commits while the buffer has room,
        // so the buffering behavior is visible; drain at the fence.
        let pick = 0;
        let (steps, next) = &succs[pick];
        let actions: Vec<String> = steps.iter().map(|s| s.render(&p)).collect();
        let buffer: Vec<String> = next.buf[0]
            .iter()
            .map(|e| format!("({},{})", p.var_name(e.var), e.val))
            .collect();
        println!(
            "{:<18} buffer: [{}]   mem x={} a={}",
            actions.join(" "),
            buffer.join(" "),
            next.mem[0],
            next.mem[p.reg_loc(p.threads[0].regs[0])]
        );
        if actions[0].contains("rd,x") {
            println!("                   ^ the read forwarded the latest buffered write to x");
        }
        if actions[0].contains("tau") && buffer.is_empty() {
            println!("                   ^ the fence fired only once the buffer drained");
        }
        state = next.clone();
    }
    println!("\nthread finished with empty buffer");
}
