# constructed: two different arguments with equal hashes
# expect: 1
knows: a, b
deduce: ?x
knows: ?x
deduce: ?y
eq: h(?x) = h(?y . a)
