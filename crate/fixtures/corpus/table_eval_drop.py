evaluation_plan = [
# After action 0 (approach glass with yellowish liquid)
(0, {'can_grasp': ('glass with yellowish liquid', 'top'),
'collision_free': (),
'timeout': (),
'check_motion_health': (),
'can_reach': ('glass with yellowish liquid', 'top')},
(True, '', True, True, True)),

# After action 1 (pick glass with yellowish liquid)
(1, {'holding': (),
'collision_free': (),
'timeout': (),
'check_motion_health': ()},
(True, '', True, True)),

# After action 2 (drop glass with yellowish liquid into trash can)
(2, {'at_location': ('glass with yellowish liquid', 'large red trash can'),
'collision_free': (),
'timeout': (),
'check_motion_health': ()},
(True, '', True, True)),

# After action 3 (approach half-eaten apple)
(3, {'can_grasp': ('half-eaten apple', 'side'),
'collision_free': (),
'timeout': (),
'check_motion_health': (),
'can_reach': ('half-eaten apple', 'side')},
(True, '', True, True, True)),

# After action 4 (pick a half-eaten apple)
(4, {'holding': (),
'collision_free': (),
'timeout': (),
'check_motion_health': ()},
(True, '', True, True)),

# After action 5 (drop half-eaten apple into the trash can)
(5, {'at_location': ('half-eaten apple', 'large red trash can'),
'collision_free': (),
'timeout': (),
'check_motion_health': ()},
(True, '', True, True))
]
