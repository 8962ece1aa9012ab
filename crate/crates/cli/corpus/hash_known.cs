# constructed: hash a known constant
# expect: 1
knows: a
deduce: ?v
eq: ?v = h(a)
