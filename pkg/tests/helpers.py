"""Shared generators for the randomized tests."""

_BIN_OPS = [
    "+", "-", "*", "/", "%", "<<", ">>", "<", "<=", ">", ">=",
    "=", "!=", "&", "^", "|", "&&", "||",
]
_UN_OPS = ["-", "!", "~"]


def gen_expr(rng, depth, names=("a", "b", "c")):
    """Random expression text, nesting at most `depth` levels."""
    if depth <= 0 or rng.random() < 0.3:
        roll = rng.randrange(10)
        if roll < 4:
            return str(rng.randrange(0, 64))
        if roll < 5:
            return "0x%x" % rng.randrange(0, 1 << 16)
        if roll < 6:
            return "'%c'" % rng.choice("AZk9")
        if roll < 7:
            return str(rng.randrange(0, 1 << 62))
        return rng.choice(list(names))
    roll = rng.random()
    if roll < 0.15:
        return "%s%s" % (rng.choice(_UN_OPS), gen_expr(rng, depth - 1, names))
    if roll < 0.3:
        return "(%s)" % gen_expr(rng, depth - 1, names)
    return "%s %s %s" % (
        gen_expr(rng, depth - 1, names),
        rng.choice(_BIN_OPS),
        gen_expr(rng, depth - 1, names),
    )


def gen_directive_program(rng, prefix, max_lines=14):
    """Random straight-line program of conditionals, loops and prints.

    Every structural directive gets the given prefix so the same shape
    can be produced in '#' and '@' spellings.  Prints trace the path
    taken; a counter variable keeps loops finite.
    """
    lines = []
    serial = [0]

    def e(text):
        lines.append(text.replace("\x01", prefix))

    def fresh():
        serial[0] += 1
        return "v%d" % serial[0]

    def block(depth, budget):
        steps = rng.randrange(1, 4)
        for _ in range(steps):
            if budget[0] <= 0:
                break
            budget[0] -= 1
            roll = rng.random()
            if roll < 0.40 or depth >= 3:
                e('\x01print "p%d"' % rng.randrange(100))
            elif roll < 0.65:
                cond = rng.choice(["1", "0", "2 > 1", "1 = 0", "3 % 2"])
                e("\x01if %s" % cond)
                block(depth + 1, budget)
                if rng.random() < 0.5:
                    e("\x01elif %s" % rng.choice(["1", "0"]))
                    block(depth + 1, budget)
                if rng.random() < 0.5:
                    e("\x01else")
                    block(depth + 1, budget)
                e("\x01endif")
            elif roll < 0.85:
                v = fresh()
                e("%s = %d" % (v, rng.randrange(0, 3)))
                e("\x01while %s > 0" % v)
                e("%s = %s - 1" % (v, v))
                block(depth + 1, budget)
                e("\x01endw")
            else:
                v = fresh()
                e("%s = 0" % v)
                e("\x01repeat %d" % rng.randrange(1, 4))
                e("%s = %s + 1" % (v, v))
                block(depth + 1, budget)
                e("\x01until %s >= 2" % v)

    block(0, [max_lines])
    return "\n".join(lines)
