#pragma once

// Model texts shared by several test binaries.

namespace tickcheck::fixtures
{

// Tick process of the sync-based encoding for two system processes.
inline constexpr const char* sedm_tick = R"(
channel chan1, chan2;

process P_Tick {
    state tick1, tick2;
    init tick1;
    trans
        tick1 -> tick2 { sync chan1!; },
        tick2 -> tick1 { sync chan2!; };
}
)";

// Two-process toy in the sync-based encoding: P1 waits in m with local timers
// (ub 2, lb 1) before moving to n; P2 only ticks.
inline constexpr const char* sedm_toy = R"(
channel chan1, chan2;

process P_Tick {
    state tick1, tick2;
    init tick1;
    trans
        tick1 -> tick2 { sync chan1!; },
        tick2 -> tick1 { sync chan2!; };
}

process P1 {
    int ubtimer = 2, lbtimer = 1;
    state m, n;
    init m;
    trans
        m -> m { guard ubtimer > 0; sync chan1?; effect ubtimer = ubtimer - 1, lbtimer = lbtimer - (lbtimer != 0); },
        m -> n { guard lbtimer == 0; effect ubtimer = 65535, lbtimer = 0; },
        n -> n { sync chan1?; };
}

process P2 {
    state idle;
    init idle;
    trans
        idle -> idle { sync chan2?; };
}
)";

// Same tick cycle with two passive processes that only synchronize.
inline constexpr const char* sedm_passive = R"(
channel chan1, chan2;

process P_Tick {
    state tick1, tick2;
    init tick1;
    trans
        tick1 -> tick2 { sync chan1!; },
        tick2 -> tick1 { sync chan2!; };
}

process P1 { state idle; init idle; trans idle -> idle { sync chan1?; }; }
process P2 { state idle; init idle; trans idle -> idle { sync chan2?; }; }
)";

// Deprivable-resource task (pre-emptive scheduling) with a stored remaining time.
inline constexpr const char* preempt_task = R"(
int isROccupied = 0;

process A {
    int Tag = 1;
    int timeToGo = 10;
    int ltimer = 0;
    state s_i, s_Exec, s_Deprived, s_Next;
    init s_i;
    trans
        s_i -> s_Exec { guard isROccupied == 0; effect isROccupied = Tag, ltimer = timeToGo; };
}
)";

} // namespace tickcheck::fixtures
