# constructed: c is not known
# expect: 0
knows: a . b
deduce: ?v
eq: ?v = a . c
