# constructed: the second target reuses the first
# expect: 1
knows: a
deduce: ?v1
knows: ?v1 . b
deduce: ?v2
eq: ?v2 = h(?v1) . b
