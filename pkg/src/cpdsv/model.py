"""Core data model for concurrent pushdown systems and their step semantics.

A system is a fixed number of pushdown threads sharing one finite control
component.  Each thread owns an unbounded stack; an action pops, overwrites or
pushes on the top of its own stack and may change the shared state.  Stacks are
stored top-first (index 0 is the top).
"""

from collections import namedtuple, deque


class BudgetExhausted(Exception):
    """Raised when an exploration exceeds its state budget.

    Carries the states seen so far, so callers can report progress or fall
    back to a symbolic representation.
    """

    def __init__(self, seen, budget):
        super().__init__("state budget of %d exhausted" % budget)
        self.seen = seen
        self.budget = budget


SharedState = namedtuple("SharedState", "index name")
SharedState.__doc__ = "One shared (control) state; indices are dense 0..|Q|-1."

StackSymbol = namedtuple("StackSymbol", "thread index name")
StackSymbol.__doc__ = "One stack symbol of a single thread; indices dense per thread."

# The empty stack top is represented as None wherever a "symbol or empty"
# position occurs (visible-state tops, action tops, abstraction states).
EMPTY = None


class Action(namedtuple("Action", "lhs_state lhs_top rhs_state rhs_word")):
    """One pushdown action (q, w) -> (q', w') with |w| <= 1 and |w'| <= 2.

    lhs_top is a StackSymbol or None (empty-stack rule); rhs_word is a tuple of
    0..2 symbols, top first.
    """

    __slots__ = ()

    @property
    def kind(self):
        lhs = 0 if self.lhs_top is None else 1
        rhs = len(self.rhs_word)
        if rhs == lhs:
            return "overwrite"
        if rhs < lhs:
            return "pop"
        return "push"

    def __str__(self):
        lhs = "eps" if self.lhs_top is None else self.lhs_top.name
        rhs = " ".join(s.name for s in self.rhs_word) or "eps"
        return "(%s,%s) -> (%s,%s)" % (self.lhs_state.name, lhs, self.rhs_state.name, rhs)


PDS = namedtuple("PDS", "shared alphabet program initial_shared")
PDS.__doc__ = "One pushdown thread: shared states, stack alphabet, actions, initial control."

CPDS = namedtuple("CPDS", "shared initial_shared threads initial_stacks")
CPDS.__doc__ = "A fixed-thread concurrent pushdown system; threads share `shared`."

GlobalState = namedtuple("GlobalState", "q stacks")
GlobalState.__doc__ = "A concrete state: shared state plus one stack word per thread (top first)."

VisibleState = namedtuple("VisibleState", "q tops")
VisibleState.__doc__ = "The projection of a state to shared state and per-thread stack tops."

Step = namedtuple("Step", "thread action state")
Step.__doc__ = "One step: the triggering thread, the fired action, the resulting state."

Path = namedtuple("Path", "start steps")
Path.__doc__ = "An execution: start state plus the sequence of Steps taken from it."


def initial_state(cpds):
    return GlobalState(cpds.initial_shared, tuple(cpds.initial_stacks))


def visible(state):
    """Project a global state to its visible state (shared state + stack tops)."""
    return VisibleState(state.q, tuple(w[0] if w else EMPTY for w in state.stacks))


def state_key(state):
    """Deterministic sort key for global states."""
    return (state.q.index, tuple(tuple(s.index for s in w) for w in state.stacks))


def visible_key(v):
    """Deterministic sort key for visible states."""
    return (v.q.index, tuple(-1 if t is EMPTY else t.index for t in v.tops))


def format_word(word):
    return "".join(s.name for s in word) if word else "eps"


def format_state(state):
    return "<%s|%s>" % (state.q.name, ",".join(format_word(w) for w in state.stacks))


def format_visible(v):
    tops = ",".join("eps" if t is EMPTY else t.name for t in v.tops)
    return "<%s|%s>" % (v.q.name, tops)


def enabled_successors(cpds, state, i):
    """All one-step successors of `state` obtainable by thread i's actions.

    Returns (action, successor) pairs in action declaration order.  Disabled
    actions contribute nothing: firing one would be a no-op, which never adds
    a new reachable state.
    """
    pds = cpds.threads[i]
    stack = state.stacks[i]
    top = stack[0] if stack else EMPTY
    out = []
    for act in pds.program:
        if act.lhs_state != state.q or act.lhs_top != top:
            continue
        if top is EMPTY:
            new_stack = act.rhs_word
        else:
            new_stack = act.rhs_word + stack[1:]
        stacks = state.stacks[:i] + (new_stack,) + state.stacks[i + 1:]
        out.append((act, GlobalState(act.rhs_state, stacks)))
    return out


def thread_closure_paths(cpds, state, i, budget):
    """Closure of `state` under thread-i steps, with the steps that reach each state.

    Returns a dict mapping every reachable state (including `state` itself) to
    the tuple of Steps leading to it from `state`.  Exploration is
    breadth-first in deterministic order.  Raises BudgetExhausted when more
    than `budget` states are found.
    """
    paths = {state: ()}
    queue = deque([state])
    while queue:
        s = queue.popleft()
        for act, succ in enabled_successors(cpds, s, i):
            if succ in paths:
                continue
            if len(paths) >= budget:
                raise BudgetExhausted(set(paths), budget)
            paths[succ] = paths[s] + (Step(i, act, succ),)
            queue.append(succ)
    return paths


def thread_closure(cpds, state, i, budget):
    """All global states reachable from `state` using only thread-i steps."""
    return set(thread_closure_paths(cpds, state, i, budget))


def contexts(path):
    """Number of maximal same-thread runs along a path."""
    count = 0
    last = None
    for step in path.steps:
        if step.thread != last:
            count += 1
            last = step.thread
    return count


def validate(cpds):
    """Check structural invariants; returns a list of diagnostic strings.

    An empty list means the system is well-formed.  Diagnostics are data, not
    exceptions, so callers can collect all problems at once.
    """
    diags = []
    indices = [q.index for q in cpds.shared]
    if sorted(indices) != list(range(len(cpds.shared))):
        diags.append("shared state indices are not dense 0..%d" % (len(cpds.shared) - 1))
    names = [q.name for q in cpds.shared]
    if len(set(names)) != len(names):
        diags.append("duplicate shared state names")
    shared_set = set(cpds.shared)
    if cpds.initial_shared not in shared_set:
        diags.append("initial shared state %r is not declared" % (cpds.initial_shared,))
    if len(cpds.initial_stacks) != len(cpds.threads):
        diags.append("initial stacks count %d != thread count %d"
                     % (len(cpds.initial_stacks), len(cpds.threads)))
    for i, pds in enumerate(cpds.threads):
        alpha = set(pds.alphabet)
        sym_names = [s.name for s in pds.alphabet]
        if len(set(sym_names)) != len(sym_names):
            diags.append("thread %d: duplicate stack symbol names" % i)
        for sym in pds.alphabet:
            if sym.thread != i:
                diags.append("thread %d: symbol %s tagged for thread %d" % (i, sym.name, sym.thread))
        if set(pds.shared) != shared_set:
            diags.append("thread %d: shared states differ from the system's" % i)
        if pds.initial_shared != cpds.initial_shared:
            diags.append("thread %d: initial shared state differs from the system's" % i)
        for act in pds.program:
            where = "thread %d, action %s" % (i, act)
            if act.lhs_state not in shared_set or act.rhs_state not in shared_set:
                diags.append("%s: undeclared shared state" % where)
            if act.lhs_top is not EMPTY and act.lhs_top not in alpha:
                diags.append("%s: undeclared top symbol" % where)
            for sym in act.rhs_word:
                if sym not in alpha:
                    diags.append("%s: undeclared symbol in rhs" % where)
            if len(act.rhs_word) > 2:
                diags.append("%s: rhs longer than 2" % where)
            if act.lhs_top is EMPTY and len(act.rhs_word) > 1:
                diags.append("%s: never-enabled rule (empty-stack lhs with 2-symbol rhs)" % where)
        if i < len(cpds.initial_stacks):
            word = cpds.initial_stacks[i]
            for sym in word:
                if sym not in alpha:
                    diags.append("thread %d: initial stack uses undeclared symbol %s" % (i, sym.name))
            # The finite overapproximation treats a symbol as exposable only
            # when some push buries it, so deeper initial stacks would hide
            # reachable tops from it.
            if len(word) > 1:
                diags.append("thread %d: initial stack has %d symbols; at most one is supported"
                             % (i, len(word)))
    return diags
