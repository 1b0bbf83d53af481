evaluation_plan = [
    (0, {'can_grasp': ('crumpled paper ball 1', 'top')}, (True,)),
    (0, {'collision_free': ()}, ('',)),
    (0, {'timeout': ()}, (True,)),
    (0, {'check_motion_health': ()}, (True,)),
    (1, {'holding': ()}, (True,)),
    (1, {'collision_free': ()}, ('',)),
    (1, {'timeout': ()}, (True,)),
    (1, {'check_motion_health': ()}, (True,)),
    (16, {'holding': ()}, (True,)),
    (16, {'collision_free': ()}, ('',)),
    (16, {'timeout': ()}, (True,)),
    (16, {'check_motion_health': ()}, (True,)),
    (17, {'at_location': ('glass with yellowish liquid', 'large white sink')}, (True,)),
    (17, {'collision_free': ()}, ('',)),
    (17, {'timeout': ()}, (True,)),
    (17, {'check_motion_health': ()}, (True,))
]
