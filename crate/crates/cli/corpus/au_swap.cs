# constructed: ?v = b . a from a . b
# expect: 1
knows: a . b
deduce: ?v
eq: ?v = b . a
