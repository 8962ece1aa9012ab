# constructed: a hash cannot be inverted
# expect: 0
knows: h(a)
deduce: ?v
eq: ?v = a
