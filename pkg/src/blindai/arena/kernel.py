"""Integer simulation kernel and open-loop MCTS, compiled with numba when enabled.

The whole game state is one int64 vector (layout below) so the same code
runs as a compiled kernel or as plain Python on numpy arrays. Hit detection
reads the pre-frame state for both players before any damage is applied,
which keeps the update order-independent and mirror-symmetric.
"""
import numpy as np

from .._jit import njit

N_ACTIONS = 40
WAIT = 40  # internal no-op for an action used in the wrong context
WAIT_FRAMES = 4

STAGE_W = 960
START_X0 = 280
START_X1 = 680
MAX_HP = 400
MAX_FRAMES = 3600
GRAVITY = 2
PROJ_HIT_DX = 25
PROJ_HIT_DY = 40
PROJ_SPAWN_DX = 30
FRONT_SLACK = 20
HEAVY_DAMAGE = 20
GUARD_DIVISOR = 5

# action-table columns (must match actions.COLUMNS)
C_CAT, C_DMG, C_RANGE, C_STARTUP, C_ACTIVE, C_RECOVERY, C_MOVE = 0, 1, 2, 3, 4, 5, 6
C_PSPEED, C_JVY, C_JVX, C_STUN, C_HEIGHT, C_AUDIBLE = 7, 8, 9, 10, 11, 12

CAT_THROW, CAT_ATTACK, CAT_SKILL, CAT_MOVE, CAT_GUARD, CAT_AIR_ATTACK, CAT_AIR_SKILL = 0, 1, 2, 3, 4, 5, 6

# sound event types; 0..6 are "action start" per category
EV_HIT = 7
EV_GUARD = 8
EV_PROJ_LAUNCH = 9
EV_PROJ_TRAVEL = 10
EV_ROUND_START = 11
EV_HEAVY = 12
N_EVENT_TYPES = 13
MAX_EVENTS = 32

# state layout
S_FRAME = 0
S_OVER = 1
S_SEED = 2
P0 = 3
PSTRIDE = 10
PX, PY, PVY, PVX, PHP, PACT, PAFR, PSTUN, PFACE, PHITDONE = 0, 1, 2, 3, 4, 5, 6, 7, 8, 9
Q0 = P0 + 2 * PSTRIDE
NPROJ = 6
QSTRIDE = 7
QACTIVE, QOWNER, QX, QY, QVX, QDMG, QSTUN = 0, 1, 2, 3, 4, 5, 6
STATE_LEN = Q0 + NPROJ * QSTRIDE


@njit
def reset_kernel(s, seed, mirrored):
    s[:] = 0
    s[S_SEED] = seed
    for p in range(2):
        b = P0 + p * PSTRIDE
        left = (p == 0) != (mirrored != 0)
        s[b + PX] = START_X0 if left else START_X1
        s[b + PFACE] = 1 if left else -1
        s[b + PHP] = MAX_HP
        s[b + PACT] = -1


@njit
def is_free(s, p):
    b = P0 + p * PSTRIDE
    return s[b + PACT] < 0 and s[b + PSTUN] == 0


@njit
def _emit(ev, n, etype, x, owner):
    if n < ev.shape[0]:
        ev[n, 0] = etype
        ev[n, 1] = x
        ev[n, 2] = owner
        return n + 1
    return n


@njit
def _start_action(s, table, p, a, ev, n_ev):
    b = P0 + p * PSTRIDE
    cat = table[a, C_CAT]
    airborne = s[b + PY] > 0
    is_air = cat == CAT_AIR_ATTACK or cat == CAT_AIR_SKILL
    s[b + PAFR] = 0
    s[b + PHITDONE] = 0
    if is_air != airborne:
        s[b + PACT] = WAIT
        return n_ev
    s[b + PACT] = a
    if table[a, C_JVY] > 0:
        s[b + PVY] = table[a, C_JVY]
        s[b + PVX] = table[a, C_JVX] * s[b + PFACE]
    if table[a, C_AUDIBLE] != 0:
        n_ev = _emit(ev, n_ev, cat, s[b + PX], p)
    return n_ev


@njit
def _guarding(s, table, t):
    b = P0 + t * PSTRIDE
    a = s[b + PACT]
    return a >= 0 and a != WAIT and table[a, C_CAT] == CAT_GUARD and s[b + PY] == 0


@njit
def step_kernel(s, table, a1, a2, ev):
    """Advance one frame in place; returns the number of events written to ``ev``."""
    n_ev = 0
    if s[S_FRAME] == 0:
        n_ev = _emit(ev, n_ev, EV_ROUND_START, STAGE_W // 2, -1)

    # inputs; idle grounded players turn to face the opponent first
    for p in range(2):
        b = P0 + p * PSTRIDE
        o = P0 + (1 - p) * PSTRIDE
        if s[b + PACT] < 0 and s[b + PY] == 0:
            if s[o + PX] > s[b + PX]:
                s[b + PFACE] = 1
            elif s[o + PX] < s[b + PX]:
                s[b + PFACE] = -1
        a = a1 if p == 0 else a2
        if a >= 0 and s[b + PACT] < 0 and s[b + PSTUN] == 0:
            n_ev = _start_action(s, table, p, a, ev, n_ev)

    # hit detection against the pre-frame state of both players
    hit_t = np.zeros(8, np.int64)
    hit_dmg = np.zeros(8, np.int64)
    hit_stun = np.zeros(8, np.int64)
    hit_guard = np.zeros(8, np.int64)
    n_hits = 0
    for p in range(2):
        b = P0 + p * PSTRIDE
        a = s[b + PACT]
        if a < 0:
            continue
        s[b + PAFR] += 1
        if a == WAIT:
            continue
        afr = s[b + PAFR]
        su = table[a, C_STARTUP]
        if table[a, C_PSPEED] > 0 and afr == su + 1:
            for q in range(NPROJ):
                qb = Q0 + q * QSTRIDE
                if s[qb + QACTIVE] == 0:
                    s[qb + QACTIVE] = 1
                    s[qb + QOWNER] = p
                    s[qb + QX] = s[b + PX] + PROJ_SPAWN_DX * s[b + PFACE]
                    s[qb + QY] = s[b + PY]
                    s[qb + QVX] = table[a, C_PSPEED] * s[b + PFACE]
                    s[qb + QDMG] = table[a, C_DMG]
                    s[qb + QSTUN] = table[a, C_STUN]
                    n_ev = _emit(ev, n_ev, EV_PROJ_LAUNCH, s[qb + QX], p)
                    break
        if table[a, C_DMG] <= 0 or table[a, C_RANGE] <= 0 or s[b + PHITDONE] != 0:
            continue
        if afr <= su or afr > su + table[a, C_ACTIVE]:
            continue
        t = 1 - p
        tb = P0 + t * PSTRIDE
        dx = s[tb + PX] - s[b + PX]
        if dx * s[b + PFACE] < -FRONT_SLACK or abs(dx) > table[a, C_RANGE]:
            continue
        cat = table[a, C_CAT]
        if cat == CAT_AIR_ATTACK:
            if abs(s[tb + PY] - s[b + PY]) > table[a, C_HEIGHT]:
                continue
        elif s[tb + PY] > table[a, C_HEIGHT]:
            continue
        s[b + PHITDONE] = 1
        hit_t[n_hits] = t
        hit_dmg[n_hits] = table[a, C_DMG]
        hit_stun[n_hits] = table[a, C_STUN]
        hit_guard[n_hits] = 1 if (cat != CAT_THROW and _guarding(s, table, t)) else 0
        n_hits += 1

    # projectiles travel, then test the owner's opponent
    for q in range(NPROJ):
        qb = Q0 + q * QSTRIDE
        if s[qb + QACTIVE] == 0:
            continue
        s[qb + QX] += s[qb + QVX]
        if s[qb + QX] < 0 or s[qb + QX] > STAGE_W:
            s[qb + QACTIVE] = 0
            continue
        t = 1 - s[qb + QOWNER]
        tb = P0 + t * PSTRIDE
        if abs(s[tb + PX] - s[qb + QX]) <= PROJ_HIT_DX and abs(s[tb + PY] - s[qb + QY]) <= PROJ_HIT_DY:
            if n_hits < 8:
                hit_t[n_hits] = t
                hit_dmg[n_hits] = s[qb + QDMG]
                hit_stun[n_hits] = s[qb + QSTUN]
                hit_guard[n_hits] = 1 if _guarding(s, table, t) else 0
                n_hits += 1
            s[qb + QACTIVE] = 0
        else:
            n_ev = _emit(ev, n_ev, EV_PROJ_TRAVEL, s[qb + QX], s[qb + QOWNER])

    # apply hits
    for i in range(n_hits):
        t = hit_t[i]
        tb = P0 + t * PSTRIDE
        if hit_guard[i] != 0:
            s[tb + PHP] -= hit_dmg[i] // GUARD_DIVISOR
            n_ev = _emit(ev, n_ev, EV_GUARD, s[tb + PX], t)
        else:
            s[tb + PHP] -= hit_dmg[i]
            s[tb + PACT] = -1
            s[tb + PAFR] = 0
            if hit_stun[i] > s[tb + PSTUN]:
                s[tb + PSTUN] = hit_stun[i]
            n_ev = _emit(ev, n_ev, EV_HIT, s[tb + PX], t)
            if hit_dmg[i] >= HEAVY_DAMAGE:
                n_ev = _emit(ev, n_ev, EV_HEAVY, s[tb + PX], t)
        if s[tb + PHP] < 0:
            s[tb + PHP] = 0

    # movement and vertical physics
    for p in range(2):
        b = P0 + p * PSTRIDE
        a = s[b + PACT]
        if a >= 0 and a != WAIT and s[b + PY] == 0 and s[b + PVY] == 0:
            if s[b + PAFR] <= table[a, C_STARTUP] + table[a, C_ACTIVE]:
                s[b + PX] += table[a, C_MOVE] * s[b + PFACE]
        if s[b + PY] > 0 or s[b + PVY] > 0:
            s[b + PY] += s[b + PVY]
            s[b + PVY] -= GRAVITY
            s[b + PX] += s[b + PVX]
            if s[b + PY] <= 0:
                s[b + PY] = 0
                s[b + PVY] = 0
                s[b + PVX] = 0
                if a >= 0 and a != WAIT and table[a, C_CAT] >= CAT_AIR_ATTACK:
                    s[b + PACT] = -1
                    s[b + PAFR] = 0
        if s[b + PX] < 0:
            s[b + PX] = 0
        elif s[b + PX] > STAGE_W:
            s[b + PX] = STAGE_W

    # action completion and hitstun
    for p in range(2):
        b = P0 + p * PSTRIDE
        a = s[b + PACT]
        if a >= 0:
            if a == WAIT:
                total = WAIT_FRAMES
            else:
                total = table[a, C_STARTUP] + table[a, C_ACTIVE] + table[a, C_RECOVERY]
            if s[b + PAFR] >= total:
                s[b + PACT] = -1
                s[b + PAFR] = 0
        if s[b + PSTUN] > 0:
            s[b + PSTUN] -= 1

    s[S_FRAME] += 1
    if s[P0 + PHP] <= 0 or s[P0 + PSTRIDE + PHP] <= 0 or s[S_FRAME] >= MAX_FRAMES:
        s[S_OVER] = 1
    return n_ev


# -- MCTS ---------------------------------------------------------------------

RNG_MOD = 2147483647
RNG_MUL = 48271


@njit
def rng_next(r):
    return (r * RNG_MUL) % RNG_MOD


@njit
def rng_seed(seed):
    r = seed % (RNG_MOD - 1)
    if r < 0:
        r += RNG_MOD - 1
    return r + 1


@njit
def _advance_until_free(s, table, me, action, r, ev, max_frames):
    """Play ``action`` for ``me`` and step (random opponent) until ``me`` can act again."""
    other = 1 - me
    frames = 0
    first = True
    while s[S_OVER] == 0 and frames < max_frames:
        a_me = action if first else -1
        first = False
        a_other = -1
        if is_free(s, other):
            r = rng_next(r)
            a_other = r % N_ACTIONS
        if me == 0:
            step_kernel(s, table, a_me, a_other, ev)
        else:
            step_kernel(s, table, a_other, a_me, ev)
        frames += 1
        if is_free(s, me):
            break
    return frames, r


@njit
def _valid_actions(s, table, me, out):
    airborne = s[P0 + me * PSTRIDE + PY] > 0
    n = 0
    for a in range(N_ACTIONS):
        cat = table[a, C_CAT]
        is_air = cat == CAT_AIR_ATTACK or cat == CAT_AIR_SKILL
        if is_air == airborne:
            out[n] = a
            n += 1
    return n


@njit
def mcts_search(root, table, me, budget, rollout_frames, max_depth, seed, c_explore, score_scale):
    """Open-loop UCT for player ``me`` with a uniformly random opponent model.

    Tree nodes are sequences of ``me``'s actions; each iteration re-simulates
    from ``root``. Leaves are scored by the change in HP difference after a
    random rollout capped at ``rollout_frames`` simulated frames. Returns the
    most visited root action.
    """
    other = 1 - me
    max_nodes = budget + 2
    children = np.full((max_nodes, N_ACTIONS), -1, np.int64)
    order = np.zeros((max_nodes, N_ACTIONS), np.int64)
    n_valid = np.full(max_nodes, -1, np.int64)
    n_tried = np.zeros(max_nodes, np.int64)
    visits = np.zeros(max_nodes, np.float64)
    value = np.zeros(max_nodes, np.float64)
    path = np.zeros(max_depth + 2, np.int64)
    s = np.empty_like(root)
    ev = np.zeros((MAX_EVENTS, 3), np.int64)
    r = rng_seed(seed)
    mb = P0 + me * PSTRIDE
    ob = P0 + other * PSTRIDE
    base = root[mb + PHP] - root[ob + PHP]
    n_nodes = 1
    for _ in range(budget):
        s[:] = root
        node = 0
        depth = 0
        plen = 1
        path[0] = 0
        frames = 0
        while s[S_OVER] == 0:
            if n_valid[node] < 0:
                k = _valid_actions(s, table, me, order[node])
                for i in range(k - 1, 0, -1):
                    r = rng_next(r)
                    j = r % (i + 1)
                    tmp = order[node, i]
                    order[node, i] = order[node, j]
                    order[node, j] = tmp
                n_valid[node] = k
            if n_tried[node] < n_valid[node]:
                a = order[node, n_tried[node]]
                n_tried[node] += 1
                child = n_nodes
                n_nodes += 1
                children[node, a] = child
                f, r = _advance_until_free(s, table, me, a, r, ev, rollout_frames)
                frames += f
                path[plen] = child
                plen += 1
                break
            if depth >= max_depth:
                break
            best = -1
            best_score = -1e300
            log_n = np.log(visits[node] + 1.0)
            for i in range(n_valid[node]):
                a = order[node, i]
                c = children[node, a]
                score = value[c] / visits[c] + c_explore * np.sqrt(log_n / visits[c])
                if score > best_score:
                    best_score = score
                    best = a
            f, r = _advance_until_free(s, table, me, best, r, ev, rollout_frames)
            frames += f
            node = children[node, best]
            path[plen] = node
            plen += 1
            depth += 1
        while s[S_OVER] == 0 and frames < rollout_frames:
            a0 = -1
            a1 = -1
            if is_free(s, 0):
                r = rng_next(r)
                a0 = r % N_ACTIONS
            if is_free(s, 1):
                r = rng_next(r)
                a1 = r % N_ACTIONS
            step_kernel(s, table, a0, a1, ev)
            frames += 1
        result = ((s[mb + PHP] - s[ob + PHP]) - base) / score_scale
        for i in range(plen):
            visits[path[i]] += 1.0
            value[path[i]] += result
    best = -1
    most = -1.0
    for i in range(n_valid[0]):
        a = order[0, i]
        c = children[0, a]
        if c >= 0 and visits[c] > most:
            most = visits[c]
            best = a
    return best


@njit
def run_frames(s, table, actions1, actions2, ev):
    """Replay per-frame inputs; returns the HP trajectory (frames, 2)."""
    n = actions1.shape[0]
    hp = np.zeros((n, 2), np.int64)
    for i in range(n):
        step_kernel(s, table, actions1[i], actions2[i], ev)
        hp[i, 0] = s[P0 + PHP]
        hp[i, 1] = s[P0 + PSTRIDE + PHP]
    return hp
